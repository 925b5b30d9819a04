#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwap/domain.hpp"
#include "gwap/progression.hpp"
#include "gwap/scoring.hpp"

namespace gwap {

enum class SessionState { active, ended };

enum class MotivatorKind {
    cheer,
    score_explainer,
    new_label_education,
    end_of_game_encouragement,
    badge_progress,
    high_quality_praise,
};

[[nodiscard]] std::string_view to_string(MotivatorKind k) noexcept;

struct MotivatorMessage
{
    MotivatorKind kind = MotivatorKind::score_explainer;
    std::string text;
    nlohmann::json data;
};

struct Response
{
    SessionId session;
    PlayerId player;
    Modality modality = Modality::text;
    SnippetId snippet;
    std::string raw_label;
    std::string label;
    ScoreBreakdown breakdown;
    bool counted = true;
    Timestamp at = 0;
};

struct PendingSnippet
{
    SnippetId snippet;
    bool counted = true;
};

struct GameSummary
{
    SessionId session;
    Points game_score = 0;
    std::int64_t responses = 0;
    Points total_score = 0;         // this modality
    Points global_total_score = 0;
    std::optional<std::int64_t> rank;
    std::vector<LeaderboardEntry> nearby;
    std::vector<std::string> badges_earned;
    std::vector<BadgeProgress> remaining_badges;
    MotivatorMessage encouragement;
};

struct GameSession
{
    SessionId id;
    PlayerId player;
    Modality modality = Modality::text;
    int mood_rating = 0;
    bool guest = false;
    std::vector<SnippetId> served;
    std::optional<PendingSnippet> pending;
    std::vector<Response> responses;
    Points game_score = 0;
    SessionState state = SessionState::active;
    Timestamp started_at = 0;
    std::optional<Timestamp> ended_at;
    std::vector<std::string> badges_earned;
    std::optional<GameSummary> summary;
};

struct SurveyRecord
{
    SessionId session;
    PlayerId player;
    Modality modality = Modality::text;
    int mood_rating = 0;
    Timestamp at = 0;
};

void to_json(nlohmann::json& j, const MotivatorMessage& m);
void from_json(const nlohmann::json& j, MotivatorMessage& m);
void to_json(nlohmann::json& j, const Response& r);
void from_json(const nlohmann::json& j, Response& r);
void to_json(nlohmann::json& j, const GameSummary& s);
void from_json(const nlohmann::json& j, GameSummary& s);
void to_json(nlohmann::json& j, const GameSession& s);
void to_json(nlohmann::json& j, const SurveyRecord& s);
void from_json(const nlohmann::json& j, SurveyRecord& s);

} // namespace gwap
