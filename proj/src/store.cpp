#include "gwap/store.hpp"

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

const PlayerAccount& State::account(const PlayerId& id) const
{
    auto it = accounts.find(id);
    if (it == accounts.end())
        throw Error(ErrorCode::UnknownPlayer, fmt::format("unknown player '{}'", id.str()));
    return it->second;
}

const GameSession& State::session(const SessionId& id) const
{
    auto it = sessions.find(id);
    if (it == sessions.end())
        throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", id.str()));
    return it->second;
}

GameSession& State::mutable_session(const SessionId& id)
{
    auto it = sessions.find(id);
    if (it == sessions.end())
        throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", id.str()));
    return it->second;
}

const Snippet& State::snippet(const SnippetId& id) const
{
    auto it = snippets.find(id);
    if (it == snippets.end())
        throw Error(ErrorCode::UnknownSnippet, fmt::format("unknown snippet '{}'", id.str()));
    return it->second;
}

bool State::has_answered(const PlayerId& player, const Snippet& s) const
{
    const auto& answered = partition(s.modality).answered;
    auto it = answered.find(player);
    return it != answered.end() && it->second.contains(s.id);
}

nlohmann::json State::partition_snapshot(Modality m) const
{
    const auto& part = partition(m);
    auto answered = nlohmann::json::object();
    for (const auto& [player, set] : part.answered)
        answered[player.str()] = set;
    return {{"modality", m},
            {"order", part.order},
            {"tallies", part.tallies.snapshot()},
            {"answered", answered},
            {"stats", progression.snapshot(Scope{m})}};
}

void State::apply(const EventRecord& e)
{
    const auto& p = e.payload;
    switch (e.kind) {
    case EventKind::account_created: {
        auto acct = p.at("account").get<PlayerAccount>();
        ++player_seq;
        if (acct.email)
            email_index[*acct.email] = acct.id;
        if (p.contains("password_hash"))
            password_hashes[acct.id] = p["password_hash"].get<std::string>();
        if (p.contains("activation"))
            activations[p["activation"].at("token_hash").get<std::string>()] =
                ActivationRecord{acct.id, p["activation"].at("expires_at").get<Timestamp>()};
        accounts[acct.id] = std::move(acct);
        break;
    }
    case EventKind::account_activated: {
        const auto player = p.at("player").get<PlayerId>();
        accounts.at(player).activated = true;
        if (p.contains("token_hash"))
            activations.erase(p["token_hash"].get<std::string>());
        break;
    }
    case EventKind::profile_updated: {
        const auto update = p.at("account").get<PlayerAccount>();
        auto& acct = accounts.at(update.id);
        acct.display_name = update.display_name;
        acct.age = update.age;
        acct.languages = update.languages;
        acct.privacy = update.privacy;
        acct.avatar = update.avatar;
        acct.info_sheet_acknowledged = update.info_sheet_acknowledged;
        break;
    }
    case EventKind::token_issued:
        tokens[p.at("token_hash").get<std::string>()] =
            AuthRecord{p.at("player").get<PlayerId>(), p.at("expires_at").get<Timestamp>(), p.at("guest").get<bool>()};
        break;
    case EventKind::snippet_added: {
        auto s = p.at("snippet").get<Snippet>();
        ++snippet_seq;
        auto& part = partition(s.modality);
        part.order.push_back(s.id);
        part.tallies.add_snippet(s.id, s.active);
        snippets[s.id] = std::move(s);
        break;
    }
    case EventKind::snippet_status: {
        const auto id = p.at("snippet").get<SnippetId>();
        const bool active = p.at("active").get<bool>();
        auto& s = snippets.at(id);
        s.active = active;
        partition(s.modality).tallies.set_active(id, active);
        break;
    }
    case EventKind::session_start: {
        GameSession s;
        s.id = p.at("session").get<SessionId>();
        s.player = p.at("player").get<PlayerId>();
        s.modality = p.at("modality").get<Modality>();
        s.mood_rating = p.at("mood_rating").get<int>();
        s.guest = p.at("guest").get<bool>();
        s.started_at = e.at;
        ++session_seq;
        active_sessions[{s.player, s.modality}] = s.id;
        sessions[s.id] = std::move(s);
        break;
    }
    case EventKind::survey:
        surveys.push_back(p.get<SurveyRecord>());
        break;
    case EventKind::snippet_served: {
        auto& s = mutable_session(p.at("session").get<SessionId>());
        const auto snippet = p.at("snippet").get<SnippetId>();
        s.served.push_back(snippet);
        s.pending = PendingSnippet{snippet, p.at("counted").get<bool>()};
        break;
    }
    case EventKind::response: {
        auto r = p.get<Response>();
        auto& part = partition(r.modality);
        part.tallies.record_response(r.player, r.snippet, r.label, r.raw_label, r.counted);
        part.answered[r.player].insert(r.snippet);
        auto& s = mutable_session(r.session);
        s.game_score += r.breakdown.final_points;
        s.pending.reset();
        if (!s.guest) {
            progression.apply_response({r.player, r.modality, r.breakdown.final_points, r.counted, r.breakdown.p,
                                        r.label, static_cast<std::int64_t>(s.responses.size()) + 1, s.game_score,
                                        e.id});
        }
        s.responses.push_back(std::move(r));
        break;
    }
    case EventKind::session_end: {
        auto& s = mutable_session(p.at("session").get<SessionId>());
        s.state = SessionState::ended;
        s.ended_at = e.at;
        s.pending.reset();
        active_sessions.erase({s.player, s.modality});
        if (!s.guest)
            progression.apply_game_end(s.player, s.modality, !s.responses.empty());
        break;
    }
    case EventKind::session_summary: {
        auto& s = mutable_session(p.at("session").get<SessionId>());
        s.summary = p.at("summary").get<GameSummary>();
        break;
    }
    case EventKind::badge_award: {
        const auto player = p.at("player").get<PlayerId>();
        const auto badge = p.at("badge").get<std::string>();
        progression.award(player, badge, e.at);
        if (p.contains("session") && !p["session"].is_null())
            mutable_session(p["session"].get<SessionId>()).badges_earned.push_back(badge);
        break;
    }
    case EventKind::promotion: {
        const auto v = p.get<ValidatedAnnotation>();
        partition(snippet(v.snippet_id).modality).tallies.promote(v);
        break;
    }
    }
    last_event_id = e.id;
}

const State& Txn::state() const noexcept { return store_.state_; }

const EngineConfig& Txn::config() const noexcept { return store_.cfg_; }

Timestamp Txn::now() { return store_.clock_->now(); }

const EventRecord& Txn::emit(EventKind kind, nlohmann::json payload)
{
    EventRecord e{store_.state_.last_event_id + 1, kind, now(), std::move(payload)};
    try {
        store_.state_.apply(e);
    } catch (...) {
        poisoned_ = true;
        throw;
    }
    batch_.push_back(std::move(e));
    return batch_.back();
}

Store::Store(std::unique_ptr<EventLog> log, EngineConfig cfg, std::shared_ptr<Clock> clock)
    : cfg_(validate_config(cfg)), log_(std::move(log)), clock_(std::move(clock))
{
    rebuild();
}

void Store::commit(Txn& txn)
{
    log_->append(txn.batch_);
}

void Store::rebuild()
{
    State fresh;
    fresh.cfg = cfg_;
    for (const auto& e : log_->load_all()) {
        try {
            fresh.apply(e);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& ex) {
            throw Error(ErrorCode::StorageFailure, fmt::format("cannot replay event {}: {}", e.id, ex.what()));
        }
    }
    state_ = std::move(fresh);
}

void Store::recover()
{
    std::unique_lock lock(mutex_);
    rebuild();
}

bool Store::ingest_replayed(const EventRecord& e)
{
    std::unique_lock lock(mutex_);
    if (e.id <= state_.last_event_id)
        return false;
    const EventRecord batch[] = {e};
    log_->append(batch);
    try {
        state_.apply(e);
    } catch (...) {
        rebuild();
        throw;
    }
    return true;
}

std::vector<EventRecord> Store::events() const
{
    std::shared_lock lock(mutex_);
    return log_->load_all();
}

std::uint64_t Store::last_event_id() const
{
    std::shared_lock lock(mutex_);
    return state_.last_event_id;
}

void Store::corrupt_for_testing(const std::function<void(State&)>& mutate)
{
    std::unique_lock lock(mutex_);
    mutate(state_);
}

} // namespace gwap
