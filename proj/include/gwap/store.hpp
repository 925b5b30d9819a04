#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <shared_mutex>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "gwap/clock.hpp"
#include "gwap/consensus.hpp"
#include "gwap/domain.hpp"
#include "gwap/event_log.hpp"
#include "gwap/events.hpp"
#include "gwap/progression.hpp"
#include "gwap/session_types.hpp"

namespace gwap {

struct AuthRecord
{
    PlayerId player;
    Timestamp expires_at = 0;
    bool guest = false;
};

struct ActivationRecord
{
    PlayerId player;
    Timestamp expires_at = 0;
};

/// Everything belonging to one modality: its corpus order, popularity
/// tallies and each player's answered set. Modalities never share state.
struct Partition
{
    std::vector<SnippetId> order;
    TallyBook tallies;
    std::map<PlayerId, std::set<SnippetId>> answered;
};

/// Derived state: the result of folding the event log in id order.
struct State
{
    EngineConfig cfg;
    std::uint64_t last_event_id = 0;

    std::map<PlayerId, PlayerAccount> accounts;
    std::map<std::string, PlayerId> email_index;
    std::map<PlayerId, std::string> password_hashes;
    std::map<std::string, ActivationRecord> activations;  // keyed by token hash
    std::map<std::string, AuthRecord> tokens;             // keyed by token hash

    std::map<SnippetId, Snippet> snippets;
    std::array<Partition, 3> partitions;
    ProgressionBook progression;

    std::map<SessionId, GameSession> sessions;
    std::map<std::pair<PlayerId, Modality>, SessionId> active_sessions;
    std::vector<SurveyRecord> surveys;

    std::uint64_t player_seq = 0;
    std::uint64_t session_seq = 0;
    std::uint64_t snippet_seq = 0;

    void apply(const EventRecord& e);

    [[nodiscard]] Partition& partition(Modality m) { return partitions[index_of(m)]; }
    [[nodiscard]] const Partition& partition(Modality m) const { return partitions[index_of(m)]; }

    /// Throws UnknownPlayer / UnknownSession / UnknownSnippet.
    [[nodiscard]] const PlayerAccount& account(const PlayerId& id) const;
    [[nodiscard]] const GameSession& session(const SessionId& id) const;
    [[nodiscard]] const Snippet& snippet(const SnippetId& id) const;

    [[nodiscard]] bool has_answered(const PlayerId& player, const Snippet& s) const;

    /// Canonical dump of a modality's tallies, answered sets, stats and
    /// promotions.
    [[nodiscard]] nlohmann::json partition_snapshot(Modality m) const;

private:
    GameSession& mutable_session(const SessionId& id);
};

class Store;

/// Write access inside Store::transact. Each emitted event is applied to
/// the in-memory state immediately, so later reads in the same
/// transaction see it; the batch reaches the log on commit.
class Txn
{
public:
    [[nodiscard]] const State& state() const noexcept;
    [[nodiscard]] const EngineConfig& config() const noexcept;
    [[nodiscard]] Timestamp now();

    const EventRecord& emit(EventKind kind, nlohmann::json payload);

    [[nodiscard]] bool dirty() const noexcept { return poisoned_ || !batch_.empty(); }

private:
    friend class Store;
    explicit Txn(Store& store) : store_(store) {}

    Store& store_;
    std::vector<EventRecord> batch_;
    bool poisoned_ = false;
};

/// Transactional event-sourced store. Writers are serialized; readers see
/// only committed state. A failed commit rebuilds the in-memory state
/// from the log, so a crash between sub-writes leaves nothing behind.
class Store
{
public:
    Store(std::unique_ptr<EventLog> log, EngineConfig cfg, std::shared_ptr<Clock> clock);

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    [[nodiscard]] const EngineConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] Clock& clock() noexcept { return *clock_; }
    [[nodiscard]] EventLog& log() noexcept { return *log_; }

    template <typename F>
    auto read(F&& f) const
    {
        std::shared_lock lock(mutex_);
        return std::forward<F>(f)(static_cast<const State&>(state_));
    }

    template <typename F>
    auto transact(F&& f)
    {
        std::unique_lock lock(mutex_);
        Txn txn(*this);
        try {
            if constexpr (std::is_void_v<std::invoke_result_t<F, Txn&>>) {
                std::forward<F>(f)(txn);
                commit(txn);
            } else {
                auto result = std::forward<F>(f)(txn);
                commit(txn);
                return result;
            }
        } catch (...) {
            if (txn.dirty())
                rebuild();
            throw;
        }
    }

    /// Applies an externally supplied record (restore, log shipping).
    /// Records at or below the last applied id are ignored; returns
    /// whether the record was new.
    bool ingest_replayed(const EventRecord& e);

    [[nodiscard]] std::vector<EventRecord> events() const;
    [[nodiscard]] std::uint64_t last_event_id() const;

    /// Drops the in-memory state and refolds it from the log.
    void recover();

    /// Mutates cached state directly, bypassing the log. Test-only hook
    /// for reconcile fault injection.
    void corrupt_for_testing(const std::function<void(State&)>& mutate);

private:
    friend class Txn;

    void commit(Txn& txn);
    void rebuild();

    EngineConfig cfg_;
    std::unique_ptr<EventLog> log_;
    std::shared_ptr<Clock> clock_;
    mutable std::shared_mutex mutex_;
    State state_;
};

} // namespace gwap
