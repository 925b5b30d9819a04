#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwap/domain.hpp"

namespace gwap {

enum class BadgeMetric {
    games_played,
    snippets_in_one_game,
    total_snippets,
    scoring_words,
    unique_words,
    leaderboard_entry,
    all_badges,
};

[[nodiscard]] std::string_view to_string(BadgeMetric m) noexcept;

struct BadgeDefinition
{
    std::string name;
    BadgeMetric metric;
    std::int64_t threshold;
};

/// The fixed badge catalogue. "The Whole Enchilada" is last and its
/// threshold is the number of badges before it.
[[nodiscard]] const std::vector<BadgeDefinition>& builtin_badges();

inline constexpr std::string_view kWholeEnchilada = "The Whole Enchilada";

/// Leaderboard scope: a single modality, or every modality combined.
using Scope = std::optional<Modality>;

[[nodiscard]] std::string scope_name(Scope scope);

struct UserStats
{
    PlayerId player;
    Points total_score = 0;
    Points highest_game_score = 0;
    Points highest_word_score = 0;
    std::int64_t games_played = 0;
    std::int64_t snippets_answered = 0;
    std::int64_t scoring_words = 0;
    std::int64_t unique_words = 0;
    std::int64_t max_snippets_in_game = 0;
    std::set<std::string> words;
    // Event sequence number at which total_score last changed; breaks ties.
    std::uint64_t score_reached_seq = 0;

    friend bool operator==(const UserStats&, const UserStats&) = default;
};

using MetricValues = std::map<BadgeMetric, std::int64_t>;
using HeldBadges = std::map<std::string, Timestamp>;

/// Every unheld badge whose metric meets its threshold, including The Whole
/// Enchilada when the badges earned now complete the set.
[[nodiscard]] std::vector<std::string> evaluate_badges(const MetricValues& metrics, const HeldBadges& held);

struct Standing
{
    PlayerId player;
    Points score = 0;
    std::uint64_t reached_seq = 0;
};

/// Sorts by score descending; equal scores go to whoever reached it first.
void order_standings(std::vector<Standing>& standings);

struct LeaderboardEntry
{
    std::int64_t rank = 0;
    PlayerId player;
    std::string display_name;
    std::optional<std::string> avatar;
    Points total_score = 0;
};

struct BadgeProgress
{
    std::string name;
    BadgeMetric metric;
    std::int64_t current = 0;
    std::int64_t threshold = 0;
    bool earned = false;
    std::optional<Timestamp> earned_at;
};

struct ResponseStatsUpdate
{
    PlayerId player;
    Modality modality = Modality::text;
    Points final_points = 0;
    bool counted = true;
    std::int64_t p = 0;
    std::string label;
    std::int64_t game_snippets = 0;  // responses in the current game, this one included
    Points game_score = 0;           // current game score, this response included
    std::uint64_t seq = 0;
};

/// Public leaderboards exclude guests and privacy-enabled accounts.
[[nodiscard]] bool is_public(const PlayerAccount& account) noexcept;

/// Per-player statistics, kept once globally and once per modality, and
/// the badges each player holds.
class ProgressionBook
{
public:
    void apply_response(const ResponseStatsUpdate& update);
    void apply_game_end(const PlayerId& player, Modality modality, bool had_responses);
    void award(const PlayerId& player, const std::string& badge, Timestamp at);

    [[nodiscard]] const UserStats* stats(const PlayerId& player, Scope scope) const;
    [[nodiscard]] const HeldBadges& badges(const PlayerId& player) const;

    /// Badge metrics from the player's global stats. leaderboard_entry is
    /// supplied by the caller because it depends on other players.
    [[nodiscard]] MetricValues metrics(const PlayerId& player, bool on_leaderboard) const;

    /// Rank among public players plus the player themself, or nullopt when
    /// the player has no finished game in the scope. Throws UnknownPlayer.
    [[nodiscard]] std::optional<std::int64_t> compute_rank(const PlayerId& player, Scope scope,
                                                           const std::map<PlayerId, PlayerAccount>& accounts) const;

    /// Top `limit` public players with at least one finished game.
    [[nodiscard]] std::vector<LeaderboardEntry> leaderboard(Scope scope, std::int64_t limit,
                                                            const std::map<PlayerId, PlayerAccount>& accounts) const;

    [[nodiscard]] std::vector<BadgeProgress> badge_progress(const PlayerId& player, bool on_leaderboard) const;

    [[nodiscard]] std::size_t badges_awarded() const noexcept;

    [[nodiscard]] const std::map<PlayerId, UserStats>& all_stats(Scope scope) const;

    [[nodiscard]] nlohmann::json snapshot(Scope scope) const;

    /// Direct access for fault-injection tests.
    UserStats* mutable_stats(const PlayerId& player, Scope scope);

private:
    static std::size_t slot(Scope scope) noexcept { return scope ? 1 + index_of(*scope) : 0; }

    std::array<std::map<PlayerId, UserStats>, 4> stats_;
    std::map<PlayerId, HeldBadges> badges_;
};

void to_json(nlohmann::json& j, const UserStats& s);
void to_json(nlohmann::json& j, const LeaderboardEntry& e);
void to_json(nlohmann::json& j, const BadgeProgress& b);

} // namespace gwap
