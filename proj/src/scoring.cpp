#include "gwap/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

Points round_half_up(double x) noexcept { return static_cast<Points>(std::floor(x + 0.5)); }

Points compute_base(std::int64_t p, const EngineConfig& cfg) { return cfg.base_points + cfg.per_match_bonus * p; }

double compute_multiplier(std::int64_t p, std::int64_t a, const EngineConfig& cfg)
{
    if (p < cfg.multiplier_activation_count || a <= 0)
        return 0.0;
    return static_cast<double>(p) * cfg.multiplier_scale / static_cast<double>(a);
}

ScoreBreakdown score_response(std::int64_t p, std::int64_t a, bool counted, const EngineConfig& cfg)
{
    if (p < 0 || a < 0 || p > a)
        throw Error(ErrorCode::InvalidTally, fmt::format("invalid tally p={} a={}", p, a));

    ScoreBreakdown b;
    b.p = p;
    b.a = a;
    b.counted = counted;
    if (!counted) {
        b.base = cfg.base_points;
        b.final_points = cfg.base_points;
        return b;
    }

    b.base = compute_base(p, cfg);
    b.m_percent = compute_multiplier(p, a, cfg);
    b.multiplier_factor = std::max(1.0, b.m_percent / 100.0);

    // A counted response always comes from a new responder on the snippet,
    // so the label's share after this response is (p + 1) / (a + 1).
    const double share_after = static_cast<double>(p + 1) / static_cast<double>(a + 1);
    b.hq_applied = p >= 1 && share_after > cfg.high_quality_share;

    // base * p * scale / (a * 100) as a single division keeps exact halves exact.
    double scaled = static_cast<double>(b.base);
    if (b.m_percent > 100.0) {
        scaled = static_cast<double>(b.base) * static_cast<double>(p) * cfg.multiplier_scale
                 / (static_cast<double>(a) * 100.0);
        scaled = std::max(scaled, static_cast<double>(b.base));
    }
    if (b.hq_applied)
        scaled *= cfg.high_quality_factor;
    b.final_points = round_half_up(scaled);
    return b;
}

void to_json(nlohmann::json& j, const ScoreBreakdown& b)
{
    j = nlohmann::json{{"p", b.p},
                       {"a", b.a},
                       {"base", b.base},
                       {"m_percent", b.m_percent},
                       {"multiplier_factor", b.multiplier_factor},
                       {"hq_applied", b.hq_applied},
                       {"counted", b.counted},
                       {"final", b.final_points}};
}

void from_json(const nlohmann::json& j, ScoreBreakdown& b)
{
    b.p = j.at("p").get<std::int64_t>();
    b.a = j.at("a").get<std::int64_t>();
    b.base = j.at("base").get<Points>();
    b.m_percent = j.at("m_percent").get<double>();
    b.multiplier_factor = j.at("multiplier_factor").get<double>();
    b.hq_applied = j.at("hq_applied").get<bool>();
    b.counted = j.at("counted").get<bool>();
    b.final_points = j.at("final").get<Points>();
}

} // namespace gwap
