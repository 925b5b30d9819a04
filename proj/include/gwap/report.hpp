#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "gwap/events.hpp"
#include "gwap/store.hpp"

namespace gwap {

struct AnnotationStats
{
    std::int64_t users = 0;
    std::int64_t guests = 0;
    std::int64_t snippets = 0;
    std::int64_t distinct_labels = 0;
    std::int64_t annotations = 0;
    std::int64_t label_user_associations = 0;
    double avg_responses_per_label = 0.0;
    double avg_users_per_label = 0.0;
    std::int64_t surveys = 0;
    std::int64_t badges_awarded = 0;
    double badges_per_user = 0.0;
};

/// Computed from the event log alone. Annotations are counted responses;
/// label-user associations are distinct (normalized label, player) pairs.
[[nodiscard]] AnnotationStats stats_report(std::span<const EventRecord> events);
[[nodiscard]] AnnotationStats stats_report(const Store& store);

/// Aligned two-column text.
[[nodiscard]] std::string format_stats_table(const AnnotationStats& stats);

/// Snippets a player is expected to label over their lifetime: throughput
/// (snippets per player-hour) times average lifetime play (hours).
/// Throws NegativeInput.
[[nodiscard]] double expected_contribution(double throughput, double avg_play_hours);

void to_json(nlohmann::json& j, const AnnotationStats& s);

} // namespace gwap
