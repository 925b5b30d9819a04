#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwap/store.hpp"

namespace gwap {

struct Divergence
{
    // Path of the counter, e.g. "tally/text/text-000003/happy/p" or
    // "stats/global/u000002/total_score".
    std::string counter;
    std::string expected;
    std::string actual;
};

struct ReconcileReport
{
    std::vector<Divergence> divergences;
    std::size_t events = 0;
    std::size_t responses = 0;
    std::size_t tallies_checked = 0;
    std::size_t stats_checked = 0;
    std::size_t promotions_checked = 0;

    [[nodiscard]] bool clean() const noexcept { return divergences.empty(); }
};

/// Recounts every tally, per-scope player statistic, recorded p/a before
/// value and promotion straight from the event log and compares the result
/// with the store's cached state. Call on a quiesced store.
[[nodiscard]] ReconcileReport reconcile(const Store& store);

void to_json(nlohmann::json& j, const Divergence& d);
void to_json(nlohmann::json& j, const ReconcileReport& r);

} // namespace gwap
