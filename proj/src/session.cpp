#include "gwap/session.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

const GameSession& require_active(const State& state, const SessionId& id)
{
    const auto& s = state.session(id);
    if (s.state == SessionState::ended)
        throw Error(ErrorCode::SessionEnded, fmt::format("session '{}' has ended", id.str()));
    return s;
}

std::vector<std::string> award_badges(Txn& txn, const PlayerId& player, const SessionId& session)
{
    const auto& state = txn.state();
    const auto& s = state.session(session);
    if (s.guest)
        return {};
    const auto& held = state.progression.badges(player);
    const bool lb = held.contains("Crème de la Crème") || on_leaderboard(state, player, s.modality);
    auto earned = evaluate_badges(state.progression.metrics(player, lb), held);
    for (const auto& badge : earned)
        txn.emit(EventKind::badge_award, {{"player", player}, {"badge", badge}, {"session", session}});
    return earned;
}

std::vector<MotivatorMessage> response_messages(const Response& r, Points score_before, Points score_after,
                                                const std::vector<std::string>& badges, const EngineConfig& cfg)
{
    const auto& b = r.breakdown;
    std::vector<MotivatorMessage> out;

    MotivatorMessage score{MotivatorKind::score_explainer, "", nullptr};
    if (!b.counted) {
        score.text = fmt::format("{} points. You have already labeled every snippet, so this answer keeps "
                                 "the popularity counts unchanged.",
                                 b.final_points);
    } else if (b.p == 0) {
        score.text = fmt::format("{} points. You are the first player to give this label.", b.final_points);
    } else {
        score.text = fmt::format("{} points. {} {} gave the same label before you.", b.final_points, b.p,
                                 b.p == 1 ? "player" : "players");
    }
    score.data = {{"score", b.final_points}, {"agreeing_players", b.p}, {"responders", b.a}, {"counted", b.counted}};
    out.push_back(std::move(score));

    if (b.counted && b.p == 0) {
        out.push_back({MotivatorKind::new_label_education,
                       fmt::format("A new label has been entered for this snippet. New labels earn {} base points; "
                                   "every player who already gave your label adds {} more, and once {} players "
                                   "agree a popularity multiplier kicks in.",
                                   cfg.base_points, cfg.per_match_bonus, cfg.multiplier_activation_count),
                       {{"base_points", cfg.base_points},
                        {"per_match_bonus", cfg.per_match_bonus},
                        {"multiplier_activation_count", cfg.multiplier_activation_count}}});
    }

    if (b.hq_applied) {
        out.push_back({MotivatorKind::high_quality_praise,
                       fmt::format("High-quality label! Over {:.0f}% of players agree with you, so your score was "
                                   "multiplied by {:g}.",
                                   cfg.high_quality_share * 100.0, cfg.high_quality_factor),
                       {{"factor", cfg.high_quality_factor}, {"share", cfg.high_quality_share}}});
    }

    const bool big_answer = b.final_points >= 2 * cfg.base_points;
    const bool milestone = score_after / 1000 > score_before / 1000;
    if (big_answer || milestone) {
        std::string text = milestone ? fmt::format("Great going! Your game score passed {} points.",
                                                   (score_after / 1000) * 1000)
                                     : fmt::format("Excellent answer! {} points in one go.", b.final_points);
        out.push_back({MotivatorKind::cheer, std::move(text), {{"game_score", score_after}}});
    }

    for (const auto& badge : badges)
        out.push_back({MotivatorKind::badge_progress, fmt::format("Badge earned: {}!", badge), {{"badge", badge}}});
    return out;
}

MotivatorMessage encouragement(const GameSummary& summary)
{
    const BadgeProgress* closest = nullptr;
    double best = -1.0;
    for (const auto& bp : summary.remaining_badges) {
        if (bp.threshold <= 0)
            continue;
        const double ratio = static_cast<double>(bp.current) / static_cast<double>(bp.threshold);
        if (ratio > best) {
            best = ratio;
            closest = &bp;
        }
    }
    MotivatorMessage m{MotivatorKind::end_of_game_encouragement, "", nlohmann::json::object()};
    m.text = fmt::format("Thanks for playing! You scored {} points this game.", summary.game_score);
    if (closest != nullptr) {
        m.text += fmt::format(" You are {}/{} of the way to \"{}\". Play again to get there!", closest->current,
                              closest->threshold, closest->name);
        m.data["next_badge"] = closest->name;
        m.data["current"] = closest->current;
        m.data["threshold"] = closest->threshold;
    } else {
        m.text += " Play again to climb the leaderboard!";
    }
    m.data["game_score"] = summary.game_score;
    return m;
}

} // namespace

std::size_t serve_index(std::uint64_t seed, const SessionId& session, std::size_t serve, std::size_t n)
{
    const std::uint64_t h = fnv1a(session.str());
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(serve)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(rng);
}

bool on_leaderboard(const State& state, const PlayerId& player, Modality modality)
{
    const auto limit = state.cfg.leaderboard_size;
    for (Scope scope : {Scope{}, Scope{modality}}) {
        const auto rank = state.progression.compute_rank(player, scope, state.accounts);
        if (rank && *rank <= limit)
            return true;
    }
    return false;
}

std::vector<LeaderboardEntry> nearby_standings(const State& state, const PlayerId& player, Scope scope,
                                               std::int64_t radius)
{
    std::vector<Standing> standings;
    for (const auto& [id, s] : state.progression.all_stats(scope)) {
        if (s.games_played < 1)
            continue;
        auto a = state.accounts.find(id);
        if (a == state.accounts.end())
            continue;
        if (is_public(a->second) || id == player)
            standings.push_back({id, s.total_score, s.score_reached_seq});
    }
    order_standings(standings);
    auto it = std::find_if(standings.begin(), standings.end(), [&](const Standing& st) { return st.player == player; });
    if (it == standings.end())
        return {};
    const auto pos = static_cast<std::int64_t>(it - standings.begin());
    const auto lo = std::max<std::int64_t>(0, pos - radius);
    const auto hi = std::min<std::int64_t>(static_cast<std::int64_t>(standings.size()) - 1, pos + radius);
    std::vector<LeaderboardEntry> out;
    for (auto i = lo; i <= hi; ++i) {
        const auto& st = standings[static_cast<std::size_t>(i)];
        const auto& acct = state.accounts.at(st.player);
        out.push_back({i + 1, st.player, acct.display_name, acct.avatar, st.score});
    }
    return out;
}

SessionEngine::SessionEngine(Store& store, std::uint64_t seed) : store_(store), seed_(seed) {}

GameSession SessionEngine::start_game(const PlayerId& player, Modality modality, int mood_rating)
{
    return store_.transact([&](Txn& txn) {
        const auto& state = txn.state();
        const auto& acct = state.account(player);
        if (!acct.can_play())
            throw Error(ErrorCode::AccountNotActivated, "account must be activated before playing");
        if (mood_rating < 1 || mood_rating > 5)
            throw Error(ErrorCode::InvalidMoodRating, fmt::format("mood rating {} is outside 1..5", mood_rating));
        if (state.active_sessions.contains({player, modality}))
            throw Error(ErrorCode::SessionAlreadyActive,
                        fmt::format("player already has an active {} game", to_string(modality)));

        const SessionId id(fmt::format("g{:06}", state.session_seq + 1));
        const auto& started = txn.emit(EventKind::session_start, {{"session", id},
                                                                  {"player", player},
                                                                  {"modality", modality},
                                                                  {"mood_rating", mood_rating},
                                                                  {"guest", acct.guest}});
        txn.emit(EventKind::survey, SurveyRecord{id, player, modality, mood_rating, started.at});
        return state.session(id);
    });
}

ServedSnippet SessionEngine::next_snippet(const SessionId& session)
{
    return store_.transact([&](Txn& txn) {
        const auto& state = txn.state();
        const auto& s = require_active(state, session);
        const auto& part = state.partition(s.modality);

        std::vector<SnippetId> unseen;
        std::vector<SnippetId> active;
        const auto answered_it = part.answered.find(s.player);
        for (const auto& id : part.order) {
            if (!state.snippets.at(id).active)
                continue;
            active.push_back(id);
            if (answered_it == part.answered.end() || !answered_it->second.contains(id))
                unseen.push_back(id);
        }
        if (active.empty())
            throw Error(ErrorCode::EmptyCorpus, fmt::format("no active {} snippets", to_string(s.modality)));

        const bool counted = !unseen.empty();
        const auto& pool = counted ? unseen : active;
        const auto& chosen = pool[serve_index(seed_, session, s.served.size(), pool.size())];
        txn.emit(EventKind::snippet_served, {{"session", session}, {"snippet", chosen}, {"counted", counted}});
        return ServedSnippet{state.snippets.at(chosen), counted};
    });
}

SubmitResult SessionEngine::submit_response(const SessionId& session, const SnippetId& snippet,
                                            std::string_view raw_label)
{
    return store_.transact([&](Txn& txn) {
        const auto& state = txn.state();
        const auto& cfg = txn.config();
        const auto& s = require_active(state, session);
        if (!s.pending || s.pending->snippet != snippet)
            throw Error(ErrorCode::SnippetNotServed,
                        fmt::format("snippet '{}' is not awaiting an answer in this game", snippet.str()));

        const auto label = normalize_label(raw_label, cfg.max_label_length);
        const auto& snip = state.snippet(snippet);
        if (!snip.active)
            throw Error(ErrorCode::InactiveSnippet, fmt::format("snippet '{}' is inactive", snippet.str()));

        const auto& tallies = state.partition(s.modality).tallies;
        const bool counted = s.pending->counted && !state.has_answered(s.player, snip)
                             && !tallies.has_responded(s.player, snippet) && (!s.guest || cfg.count_guest_responses);
        const auto before = tallies.counts(snippet, label);

        Response r;
        r.session = session;
        r.player = s.player;
        r.modality = s.modality;
        r.snippet = snippet;
        r.raw_label = sanitize_utf8(raw_label);
        r.label = label;
        r.breakdown = score_response(before.p, before.a, counted, cfg);
        r.counted = counted;
        r.at = txn.now();

        const Points score_before = s.game_score;
        const auto player = s.player;
        txn.emit(EventKind::response, r);

        SubmitResult result;
        if (counted) {
            for (const auto& v : tallies.promotion_candidates(snippet, cfg, txn.now())) {
                txn.emit(EventKind::promotion, v);
                result.promotions.push_back(v);
            }
        }
        result.new_badges = award_badges(txn, player, session);
        result.game_score = state.session(session).game_score;
        result.messages = response_messages(r, score_before, result.game_score, result.new_badges, cfg);
        result.response = std::move(r);
        return result;
    });
}

GameSummary SessionEngine::end_game(const SessionId& session)
{
    return store_.transact([&](Txn& txn) {
        const auto& state = txn.state();
        const auto& s = state.session(session);
        if (s.state == SessionState::ended && s.summary)
            return *s.summary;

        const auto player = s.player;
        const auto modality = s.modality;
        if (s.state == SessionState::active)
            txn.emit(EventKind::session_end, {{"session", session}});
        award_badges(txn, player, session);

        const auto& ended = state.session(session);
        GameSummary summary;
        summary.session = session;
        summary.game_score = ended.game_score;
        summary.responses = static_cast<std::int64_t>(ended.responses.size());
        summary.badges_earned = ended.badges_earned;
        if (ended.guest) {
            summary.total_score = ended.game_score;
            summary.global_total_score = ended.game_score;
        } else {
            if (const auto* st = state.progression.stats(player, Scope{modality}))
                summary.total_score = st->total_score;
            if (const auto* st = state.progression.stats(player, Scope{}))
                summary.global_total_score = st->total_score;
            summary.rank = state.progression.compute_rank(player, Scope{modality}, state.accounts);
            summary.nearby = nearby_standings(state, player, Scope{modality}, 2);
            const bool lb = on_leaderboard(state, player, modality);
            for (auto& bp : state.progression.badge_progress(player, lb))
                if (!bp.earned)
                    summary.remaining_badges.push_back(std::move(bp));
        }
        summary.encouragement = encouragement(summary);
        txn.emit(EventKind::session_summary, {{"session", session}, {"summary", summary}});
        return summary;
    });
}

GameSession SessionEngine::session(const SessionId& session) const
{
    return store_.read([&](const State& state) { return state.session(session); });
}

std::optional<std::int64_t> SessionEngine::compute_rank(const PlayerId& player, Scope scope) const
{
    return store_.read([&](const State& state) { return state.progression.compute_rank(player, scope, state.accounts); });
}

std::vector<LeaderboardEntry> SessionEngine::leaderboard(Scope scope, std::int64_t limit) const
{
    return store_.read([&](const State& state) { return state.progression.leaderboard(scope, limit, state.accounts); });
}

std::vector<BadgeProgress> SessionEngine::badge_progress(const PlayerId& player) const
{
    return store_.read([&](const State& state) {
        const auto& acct = state.account(player);
        bool lb = false;
        if (!acct.guest)
            for (auto m : kAllModalities)
                lb = lb || on_leaderboard(state, player, m);
        return state.progression.badge_progress(player, lb);
    });
}

UserStats SessionEngine::stats(const PlayerId& player, Scope scope) const
{
    return store_.read([&](const State& state) {
        (void)state.account(player);
        const auto* st = state.progression.stats(player, scope);
        UserStats out = st ? *st : UserStats{};
        out.player = player;
        return out;
    });
}

} // namespace gwap
