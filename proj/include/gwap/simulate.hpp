#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "gwap/store.hpp"

namespace gwap {

/// Synthetic player population. Each answer is drawn from `labels`, or with
/// probability `unique_junk` is a label no other answer will ever repeat.
struct SimProfile
{
    std::int64_t players = 0;
    std::int64_t games_per_player = 1;
    std::int64_t snippets_per_game = 10;
    std::map<std::string, double> labels;
    double unique_junk = 0.0;
    std::uint64_t seed = 0;
    Modality modality = Modality::text;
};

/// Throws InvalidProfile when a count is below one, a probability is
/// negative or not finite, or the probabilities do not sum to 1 within 1e-9.
void validate_profile(const SimProfile& profile);

/// Reads {"labels": {...}, "unique_junk": x} or a flat {label: probability}
/// object in which the key "unique-junk" names the junk share.
/// Throws ParseError, InvalidProfile.
void load_distribution(const nlohmann::json& j, SimProfile& profile);
void load_distribution_file(const std::string& path, SimProfile& profile);

struct SimSummary
{
    std::int64_t players = 0;
    std::int64_t games = 0;
    std::int64_t responses = 0;
    std::int64_t counted_responses = 0;
    std::int64_t promotions = 0;
    std::map<std::string, std::int64_t> promotions_by_label;
    std::int64_t snippets_with_promotion = 0;
    Points min_total_score = 0;
    Points max_total_score = 0;
    double mean_total_score = 0.0;
    Points median_total_score = 0;
    Points max_game_score = 0;
    std::int64_t badges_awarded = 0;
};

/// Registers and activates the players, then plays every game round-robin
/// through AccountService and SessionEngine. Runs single-threaded, so the
/// same seed, corpus and clock always produce the same log.
/// Throws EmptyCorpus, InvalidProfile.
SimSummary simulate(Store& store, const SimProfile& profile);

void to_json(nlohmann::json& j, const SimSummary& s);

} // namespace gwap
