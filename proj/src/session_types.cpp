#include "gwap/session_types.hpp"

#include <array>

#include "gwap/errors.hpp"

namespace gwap {

namespace {

constexpr std::array<std::pair<MotivatorKind, std::string_view>, 6> kKinds{{
    {MotivatorKind::cheer, "cheer"},
    {MotivatorKind::score_explainer, "score_explainer"},
    {MotivatorKind::new_label_education, "new_label_education"},
    {MotivatorKind::end_of_game_encouragement, "end_of_game_encouragement"},
    {MotivatorKind::badge_progress, "badge_progress"},
    {MotivatorKind::high_quality_praise, "high_quality_praise"},
}};

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

BadgeMetric parse_metric(std::string_view s)
{
    for (const auto& def : builtin_badges())
        if (to_string(def.metric) == s)
            return def.metric;
    throw Error(ErrorCode::ParseError, "unknown badge metric");
}

} // namespace

std::string_view to_string(MotivatorKind k) noexcept
{
    for (const auto& [kind, name] : kKinds)
        if (kind == k)
            return name;
    return "cheer";
}

void to_json(nlohmann::json& j, const MotivatorMessage& m)
{
    j = nlohmann::json{{"kind", std::string(to_string(m.kind))}, {"text", m.text}, {"data", m.data}};
}

void from_json(const nlohmann::json& j, MotivatorMessage& m)
{
    const auto kind = j.at("kind").get<std::string>();
    for (const auto& [k, name] : kKinds)
        if (name == kind)
            m.kind = k;
    m.text = j.at("text").get<std::string>();
    m.data = j.value("data", nlohmann::json());
}

void to_json(nlohmann::json& j, const Response& r)
{
    j = nlohmann::json{{"session", r.session},   {"player", r.player}, {"modality", r.modality},
                       {"snippet", r.snippet},   {"raw_label", r.raw_label}, {"label", r.label},
                       {"breakdown", r.breakdown}, {"counted", r.counted}, {"at", r.at}};
}

void from_json(const nlohmann::json& j, Response& r)
{
    r.session = j.at("session").get<SessionId>();
    r.player = j.at("player").get<PlayerId>();
    r.modality = j.at("modality").get<Modality>();
    r.snippet = j.at("snippet").get<SnippetId>();
    r.raw_label = j.at("raw_label").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.breakdown = j.at("breakdown").get<ScoreBreakdown>();
    r.counted = j.at("counted").get<bool>();
    r.at = j.at("at").get<Timestamp>();
}

void to_json(nlohmann::json& j, const GameSummary& s)
{
    auto progress = nlohmann::json::array();
    for (const auto& b : s.remaining_badges)
        progress.push_back(b);
    j = nlohmann::json{{"session", s.session},
                       {"game_score", s.game_score},
                       {"responses", s.responses},
                       {"total_score", s.total_score},
                       {"global_total_score", s.global_total_score},
                       {"rank", optional_json(s.rank)},
                       {"nearby", s.nearby},
                       {"badges_earned", s.badges_earned},
                       {"remaining_badges", progress},
                       {"encouragement", s.encouragement}};
}

void from_json(const nlohmann::json& j, GameSummary& s)
{
    s.session = j.at("session").get<SessionId>();
    s.game_score = j.at("game_score").get<Points>();
    s.responses = j.at("responses").get<std::int64_t>();
    s.total_score = j.at("total_score").get<Points>();
    s.global_total_score = j.at("global_total_score").get<Points>();
    s.rank = j.at("rank").is_null() ? std::nullopt : std::optional(j.at("rank").get<std::int64_t>());
    s.nearby.clear();
    for (const auto& e : j.at("nearby")) {
        LeaderboardEntry le;
        le.rank = e.at("rank").get<std::int64_t>();
        le.player = e.at("player").get<PlayerId>();
        le.display_name = e.at("display_name").get<std::string>();
        le.avatar = e.at("avatar").is_null() ? std::nullopt : std::optional(e.at("avatar").get<std::string>());
        le.total_score = e.at("total_score").get<Points>();
        s.nearby.push_back(std::move(le));
    }
    s.badges_earned = j.at("badges_earned").get<std::vector<std::string>>();
    s.remaining_badges.clear();
    for (const auto& b : j.at("remaining_badges")) {
        BadgeProgress bp;
        bp.name = b.at("name").get<std::string>();
        bp.metric = parse_metric(b.at("metric").get<std::string>());
        bp.current = b.at("current").get<std::int64_t>();
        bp.threshold = b.at("threshold").get<std::int64_t>();
        bp.earned = b.at("earned").get<bool>();
        bp.earned_at =
            b.at("earned_at").is_null() ? std::nullopt : std::optional(b.at("earned_at").get<Timestamp>());
        s.remaining_badges.push_back(std::move(bp));
    }
    s.encouragement = j.at("encouragement").get<MotivatorMessage>();
}

void to_json(nlohmann::json& j, const GameSession& s)
{
    j = nlohmann::json{{"id", s.id},
                       {"player", s.player},
                       {"modality", s.modality},
                       {"mood_rating", s.mood_rating},
                       {"guest", s.guest},
                       {"served", s.served},
                       {"responses", s.responses.size()},
                       {"game_score", s.game_score},
                       {"state", s.state == SessionState::active ? "active" : "ended"},
                       {"started_at", s.started_at},
                       {"ended_at", optional_json(s.ended_at)},
                       {"badges_earned", s.badges_earned}};
    j["pending_snippet"] = s.pending ? nlohmann::json(s.pending->snippet) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const SurveyRecord& s)
{
    j = nlohmann::json{{"session", s.session},
                       {"player", s.player},
                       {"modality", s.modality},
                       {"mood_rating", s.mood_rating},
                       {"at", s.at}};
}

void from_json(const nlohmann::json& j, SurveyRecord& s)
{
    s.session = j.at("session").get<SessionId>();
    s.player = j.at("player").get<PlayerId>();
    s.modality = j.at("modality").get<Modality>();
    s.mood_rating = j.at("mood_rating").get<int>();
    s.at = j.at("at").get<Timestamp>();
}

} // namespace gwap
