#include "gwap/progression.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

std::string_view to_string(BadgeMetric m) noexcept
{
    switch (m) {
    case BadgeMetric::games_played: return "games_played";
    case BadgeMetric::snippets_in_one_game: return "snippets_in_one_game";
    case BadgeMetric::total_snippets: return "total_snippets";
    case BadgeMetric::scoring_words: return "scoring_words";
    case BadgeMetric::unique_words: return "unique_words";
    case BadgeMetric::leaderboard_entry: return "leaderboard_entry";
    case BadgeMetric::all_badges: return "all_badges";
    }
    return "games_played";
}

const std::vector<BadgeDefinition>& builtin_badges()
{
    static const std::vector<BadgeDefinition> badges = [] {
        std::vector<BadgeDefinition> b{
            {"Newbie", BadgeMetric::games_played, 1},
            {"Adventurer", BadgeMetric::games_played, 10},
            {"100 Meter Sprint", BadgeMetric::snippets_in_one_game, 10},
            {"Explorer", BadgeMetric::games_played, 50},
            {"Marathon Runner", BadgeMetric::snippets_in_one_game, 50},
            {"Precious Gem", BadgeMetric::scoring_words, 50},
            {"Special Snowflake", BadgeMetric::unique_words, 50},
            {"Crème de la Crème", BadgeMetric::leaderboard_entry, 1},
            {"Around the World", BadgeMetric::total_snippets, 1000},
        };
        b.push_back({std::string(kWholeEnchilada), BadgeMetric::all_badges, static_cast<std::int64_t>(b.size())});
        return b;
    }();
    return badges;
}

std::string scope_name(Scope scope) { return scope ? std::string(to_string(*scope)) : std::string("global"); }

std::vector<std::string> evaluate_badges(const MetricValues& metrics, const HeldBadges& held)
{
    std::vector<std::string> earned;
    std::int64_t others_held = 0;
    for (const auto& def : builtin_badges()) {
        if (def.metric == BadgeMetric::all_badges)
            continue;
        if (held.contains(def.name)) {
            ++others_held;
            continue;
        }
        auto it = metrics.find(def.metric);
        if (it != metrics.end() && it->second >= def.threshold) {
            earned.push_back(def.name);
            ++others_held;
        }
    }
    const auto& closure = builtin_badges().back();
    if (!held.contains(closure.name) && others_held >= closure.threshold)
        earned.push_back(closure.name);
    return earned;
}

void order_standings(std::vector<Standing>& standings)
{
    std::sort(standings.begin(), standings.end(), [](const Standing& x, const Standing& y) {
        if (x.score != y.score)
            return x.score > y.score;
        if (x.reached_seq != y.reached_seq)
            return x.reached_seq < y.reached_seq;
        return x.player < y.player;
    });
}

bool is_public(const PlayerAccount& account) noexcept { return !account.guest && !account.privacy; }

void ProgressionBook::apply_response(const ResponseStatsUpdate& u)
{
    for (Scope scope : {Scope{}, Scope{u.modality}}) {
        auto& s = stats_[slot(scope)][u.player];
        s.player = u.player;
        s.total_score += u.final_points;
        s.highest_word_score = std::max(s.highest_word_score, u.final_points);
        s.highest_game_score = std::max(s.highest_game_score, u.game_score);
        ++s.snippets_answered;
        if (u.counted && u.p >= 1)
            ++s.scoring_words;
        s.words.insert(u.label);
        s.unique_words = static_cast<std::int64_t>(s.words.size());
        s.max_snippets_in_game = std::max(s.max_snippets_in_game, u.game_snippets);
        s.score_reached_seq = u.seq;
    }
}

void ProgressionBook::apply_game_end(const PlayerId& player, Modality modality, bool had_responses)
{
    if (!had_responses)
        return;
    for (Scope scope : {Scope{}, Scope{modality}}) {
        auto& s = stats_[slot(scope)][player];
        s.player = player;
        ++s.games_played;
    }
}

void ProgressionBook::award(const PlayerId& player, const std::string& badge, Timestamp at)
{
    badges_[player].try_emplace(badge, at);
}

const UserStats* ProgressionBook::stats(const PlayerId& player, Scope scope) const
{
    const auto& m = stats_[slot(scope)];
    auto it = m.find(player);
    return it == m.end() ? nullptr : &it->second;
}

const HeldBadges& ProgressionBook::badges(const PlayerId& player) const
{
    static const HeldBadges empty;
    auto it = badges_.find(player);
    return it == badges_.end() ? empty : it->second;
}

MetricValues ProgressionBook::metrics(const PlayerId& player, bool on_leaderboard) const
{
    MetricValues m;
    const UserStats* s = stats(player, Scope{});
    const UserStats zero;
    if (s == nullptr)
        s = &zero;
    m[BadgeMetric::games_played] = s->games_played;
    m[BadgeMetric::snippets_in_one_game] = s->max_snippets_in_game;
    m[BadgeMetric::total_snippets] = s->snippets_answered;
    m[BadgeMetric::scoring_words] = s->scoring_words;
    m[BadgeMetric::unique_words] = s->unique_words;
    m[BadgeMetric::leaderboard_entry] = on_leaderboard || badges(player).contains("Crème de la Crème") ? 1 : 0;
    std::int64_t held_others = 0;
    for (const auto& [name, _] : badges(player))
        if (name != kWholeEnchilada)
            ++held_others;
    m[BadgeMetric::all_badges] = held_others;
    return m;
}

std::optional<std::int64_t> ProgressionBook::compute_rank(const PlayerId& player, Scope scope,
                                                          const std::map<PlayerId, PlayerAccount>& accounts) const
{
    auto acct = accounts.find(player);
    if (acct == accounts.end())
        throw Error(ErrorCode::UnknownPlayer, fmt::format("unknown player '{}'", player.str()));
    const UserStats* own = stats(player, scope);
    if (acct->second.guest || own == nullptr || own->games_played < 1)
        return std::nullopt;

    std::vector<Standing> standings;
    for (const auto& [id, s] : stats_[slot(scope)]) {
        if (s.games_played < 1)
            continue;
        auto a = accounts.find(id);
        const bool eligible = a != accounts.end() && is_public(a->second);
        if (eligible || id == player)
            standings.push_back({id, s.total_score, s.score_reached_seq});
    }
    order_standings(standings);
    auto it = std::find_if(standings.begin(), standings.end(), [&](const Standing& st) { return st.player == player; });
    return static_cast<std::int64_t>(it - standings.begin()) + 1;
}

std::vector<LeaderboardEntry> ProgressionBook::leaderboard(Scope scope, std::int64_t limit,
                                                           const std::map<PlayerId, PlayerAccount>& accounts) const
{
    if (limit < 1)
        throw Error(ErrorCode::InvalidArgument, "leaderboard limit must be at least 1");
    std::vector<Standing> standings;
    for (const auto& [id, s] : stats_[slot(scope)]) {
        auto a = accounts.find(id);
        if (s.games_played >= 1 && a != accounts.end() && is_public(a->second))
            standings.push_back({id, s.total_score, s.score_reached_seq});
    }
    order_standings(standings);
    std::vector<LeaderboardEntry> out;
    for (const auto& st : standings) {
        if (static_cast<std::int64_t>(out.size()) >= limit)
            break;
        const auto& acct = accounts.at(st.player);
        out.push_back({static_cast<std::int64_t>(out.size()) + 1, st.player, acct.display_name, acct.avatar, st.score});
    }
    return out;
}

std::vector<BadgeProgress> ProgressionBook::badge_progress(const PlayerId& player, bool on_leaderboard) const
{
    const auto m = metrics(player, on_leaderboard);
    const auto& held = badges(player);
    std::vector<BadgeProgress> out;
    for (const auto& def : builtin_badges()) {
        BadgeProgress bp{def.name, def.metric, m.at(def.metric), def.threshold, false, std::nullopt};
        if (auto it = held.find(def.name); it != held.end()) {
            bp.earned = true;
            bp.earned_at = it->second;
        }
        out.push_back(std::move(bp));
    }
    return out;
}

std::size_t ProgressionBook::badges_awarded() const noexcept
{
    std::size_t n = 0;
    for (const auto& [_, held] : badges_)
        n += held.size();
    return n;
}

const std::map<PlayerId, UserStats>& ProgressionBook::all_stats(Scope scope) const { return stats_[slot(scope)]; }

UserStats* ProgressionBook::mutable_stats(const PlayerId& player, Scope scope)
{
    auto& m = stats_[slot(scope)];
    auto it = m.find(player);
    return it == m.end() ? nullptr : &it->second;
}

nlohmann::json ProgressionBook::snapshot(Scope scope) const
{
    auto out = nlohmann::json::object();
    for (const auto& [id, s] : stats_[slot(scope)])
        out[id.str()] = s;
    return out;
}

void to_json(nlohmann::json& j, const UserStats& s)
{
    j = nlohmann::json{{"player", s.player},
                       {"total_score", s.total_score},
                       {"highest_game_score", s.highest_game_score},
                       {"highest_word_score", s.highest_word_score},
                       {"games_played", s.games_played},
                       {"snippets_answered", s.snippets_answered},
                       {"scoring_words", s.scoring_words},
                       {"unique_words", s.unique_words},
                       {"max_snippets_in_game", s.max_snippets_in_game},
                       {"score_reached_seq", s.score_reached_seq}};
}

void to_json(nlohmann::json& j, const LeaderboardEntry& e)
{
    j = nlohmann::json{{"rank", e.rank},
                       {"player", e.player},
                       {"display_name", e.display_name},
                       {"total_score", e.total_score}};
    j["avatar"] = e.avatar ? nlohmann::json(*e.avatar) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const BadgeProgress& b)
{
    j = nlohmann::json{{"name", b.name},
                       {"metric", std::string(to_string(b.metric))},
                       {"current", b.current},
                       {"threshold", b.threshold},
                       {"earned", b.earned}};
    j["earned_at"] = b.earned_at ? nlohmann::json(*b.earned_at) : nlohmann::json(nullptr);
}

} // namespace gwap
