#pragma once

#include <cstdint>

#include <json.hpp>

#include "gwap/domain.hpp"

namespace gwap {

/// Points awarded for one response, with every intermediate quantity kept
/// so the result page can explain the score.
struct ScoreBreakdown
{
    std::int64_t p = 0;         // prior distinct players who gave the same label
    std::int64_t a = 0;         // prior distinct players who gave any label
    Points base = 0;
    double m_percent = 0.0;     // popularity multiplier percentage, 0 when inactive
    double multiplier_factor = 1.0;
    bool hq_applied = false;
    bool counted = true;        // false for replays after the corpus is exhausted
    Points final_points = 0;

    friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

[[nodiscard]] Points compute_base(std::int64_t p, const EngineConfig& cfg);

/// Multiplier percentage (p / a) * scale, or 0 below the activation count.
[[nodiscard]] double compute_multiplier(std::int64_t p, std::int64_t a, const EngineConfig& cfg);

/// Full score for one response given the tallies as they stood before it.
/// The popularity multiplier scales the base and never lowers it; the
/// high-quality factor applies when the post-response share of the label
/// exceeds cfg.high_quality_share and at least one prior player agreed.
/// Throws Error(InvalidTally) when p > a or either count is negative.
[[nodiscard]] ScoreBreakdown score_response(std::int64_t p, std::int64_t a, bool counted, const EngineConfig& cfg);

/// Rounds half away from zero toward +inf for non-negative values.
[[nodiscard]] Points round_half_up(double x) noexcept;

void to_json(nlohmann::json& j, const ScoreBreakdown& b);
void from_json(const nlohmann::json& j, ScoreBreakdown& b);

} // namespace gwap
