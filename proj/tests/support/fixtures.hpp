#pragma once

#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gwap/accounts.hpp"
#include "gwap/clock.hpp"
#include "gwap/corpus.hpp"
#include "gwap/errors.hpp"
#include "gwap/session.hpp"
#include "gwap/store.hpp"

namespace gwap::test {

/// A store with deterministic time and secrets plus the services on top.
struct World
{
    explicit World(EngineConfig cfg = {}, std::uint64_t seed = 1, std::unique_ptr<EventLog> log = nullptr);

    std::shared_ptr<ManualClock> clock;
    EventLog* log = nullptr;
    std::unique_ptr<Store> store;
    SeededSecretSource secrets;
    AccountService accounts;
    SessionEngine engine;
    int registered = 0;

    PlayerId player(const std::string& display_name = {});
    PlayerId guest();
    std::vector<SnippetId> add_snippets(Modality m, std::size_t n, const std::string& prefix = {});

    /// Starts a game, answers one snippet per label, ends the game.
    GameSummary play(const PlayerId& p, Modality m, const std::vector<std::string>& labels);

    /// Serves the next snippet and answers it.
    SubmitResult answer(const SessionId& s, const std::string& label);
};

/// Asserts the call throws gwap::Error with the given code.
template <typename F>
bool throws_code(F&& f, ErrorCode code)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code() == code;
    } catch (...) {
        return false;
    }
    return false;
}

/// Canonical text of everything tied to one modality.
std::string partition_bytes(const Store& store, Modality m);

} // namespace gwap::test
