#include "fixtures.hpp"

#include <fmt/format.h>

namespace gwap::test {

World::World(EngineConfig cfg, std::uint64_t seed, std::unique_ptr<EventLog> event_log)
    : clock(std::make_shared<ManualClock>()),
      log(event_log ? event_log.get() : nullptr),
      store([&] {
          if (!event_log) {
              event_log = std::make_unique<MemoryEventLog>();
              log = event_log.get();
          }
          return std::make_unique<Store>(std::move(event_log), cfg, clock);
      }()),
      secrets(seed),
      accounts(*store, secrets, {.password_strength = PasswordStrength::minimal}),
      engine(*store, seed)
{
}

PlayerId World::player(const std::string& display_name)
{
    ++registered;
    RegistrationRequest req;
    req.email = fmt::format("player{}@example.org", registered);
    req.password = "correct horse";
    req.info_sheet_acknowledged = true;
    if (!display_name.empty())
        req.display_name = display_name;
    const auto reg = accounts.register_account(req);
    accounts.activate(reg.activation_token);
    return reg.account.id;
}

PlayerId World::guest() { return accounts.guest_session().player; }

std::vector<SnippetId> World::add_snippets(Modality m, std::size_t n, const std::string& prefix)
{
    std::ostringstream corpus;
    const auto key = m == Modality::text ? "text" : "media_uri";
    const auto stem = prefix.empty() ? std::string(to_string(m)) : prefix;
    std::vector<SnippetId> ids;
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = fmt::format("{}-{:04}", stem, i);
        ids.emplace_back(id);
        corpus << nlohmann::json{{"id", id}, {key, fmt::format("snippet body {}", i)}}.dump() << '\n';
    }
    std::istringstream in(corpus.str());
    ingest_corpus(*store, in, m);
    return ids;
}

SubmitResult World::answer(const SessionId& s, const std::string& label)
{
    const auto served = engine.next_snippet(s);
    return engine.submit_response(s, served.snippet.id, label);
}

GameSummary World::play(const PlayerId& p, Modality m, const std::vector<std::string>& labels)
{
    const auto game = engine.start_game(p, m, 3);
    for (const auto& label : labels)
        answer(game.id, label);
    return engine.end_game(game.id);
}

std::string partition_bytes(const Store& store, Modality m)
{
    return store.read([&](const State& s) { return s.partition_snapshot(m).dump(); });
}

} // namespace gwap::test
