#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gwap/consensus.hpp"
#include "gwap/progression.hpp"
#include "gwap/session_types.hpp"
#include "gwap/store.hpp"

namespace gwap {

struct ServedSnippet
{
    Snippet snippet;
    bool counted = true;
};

struct SubmitResult
{
    Response response;
    std::vector<MotivatorMessage> messages;
    std::vector<std::string> new_badges;
    std::vector<ValidatedAnnotation> promotions;
    Points game_score = 0;
};

/// Runs games: mood survey, snippet serving, scoring, badges and the end
/// of game summary. All state lives in the Store; every operation is one
/// transaction, so a session is only ever mutated by one request at a time.
class SessionEngine
{
public:
    /// `seed` drives snippet selection. Each serve draws from a generator
    /// seeded with (seed, session, serve index), so results do not depend
    /// on how requests from different sessions interleave.
    SessionEngine(Store& store, std::uint64_t seed);

    /// Throws UnknownPlayer, AccountNotActivated, InvalidMoodRating,
    /// SessionAlreadyActive.
    GameSession start_game(const PlayerId& player, Modality modality, int mood_rating);

    /// Serves a random snippet the player has never answered, or once the
    /// modality is exhausted a random snippet that will not count toward
    /// popularity. Replaces any pending snippet.
    /// Throws UnknownSession, SessionEnded, EmptyCorpus.
    ServedSnippet next_snippet(const SessionId& session);

    /// Throws EmptyLabel, LabelTooLong, SnippetNotServed, SessionEnded,
    /// InactiveSnippet, UnknownSession.
    SubmitResult submit_response(const SessionId& session, const SnippetId& snippet, std::string_view raw_label);

    /// Ends the game. Ending an ended game returns the stored summary.
    GameSummary end_game(const SessionId& session);

    [[nodiscard]] GameSession session(const SessionId& session) const;

    [[nodiscard]] std::optional<std::int64_t> compute_rank(const PlayerId& player, Scope scope) const;
    [[nodiscard]] std::vector<LeaderboardEntry> leaderboard(Scope scope, std::int64_t limit) const;
    [[nodiscard]] std::vector<BadgeProgress> badge_progress(const PlayerId& player) const;
    [[nodiscard]] UserStats stats(const PlayerId& player, Scope scope) const;

    [[nodiscard]] Store& store() noexcept { return store_; }

private:
    Store& store_;
    std::uint64_t seed_;
};

/// Index in [0, n) for the given serve, uniform over the range.
[[nodiscard]] std::size_t serve_index(std::uint64_t seed, const SessionId& session, std::size_t serve, std::size_t n);

/// True when the player currently places within the top `cfg.leaderboard_size`
/// of the global board or the given modality's board, counting themself.
[[nodiscard]] bool on_leaderboard(const State& state, const PlayerId& player, Modality modality);

/// Players ranked around `player` in the scope (public players plus the
/// player), `radius` places either side.
[[nodiscard]] std::vector<LeaderboardEntry> nearby_standings(const State& state, const PlayerId& player, Scope scope,
                                                             std::int64_t radius);

} // namespace gwap
