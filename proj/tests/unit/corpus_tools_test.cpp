#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "gwap/reconcile.hpp"
#include "gwap/report.hpp"
#include "gwap/simulate.hpp"

using namespace gwap;
using gwap::test::throws_code;
using gwap::test::World;
using nlohmann::json;

namespace {

std::string text_corpus(int n)
{
    std::string out;
    for (int i = 0; i < n; ++i)
        out += json{{"id", fmt::format("lyric-{:03}", i)}, {"text", fmt::format("Verse {} of the libretto", i)},
                    {"source", "libretto"}}
                   .dump() +
               "\n";
    return out;
}

IngestResult ingest(Store& store, const std::string& body, Modality m = Modality::text)
{
    std::istringstream in(body);
    return ingest_corpus(store, in, m);
}

ErrorCode ingest_error(const std::string& body, Modality m, std::string* message = nullptr)
{
    World w;
    try {
        ingest(*w.store, body, m);
    } catch (const Error& e) {
        if (message)
            *message = e.what();
        return e.code();
    }
    FAIL("ingest accepted bad input");
    return ErrorCode::Internal;
}

SimProfile mixed_profile(std::int64_t players, std::uint64_t seed)
{
    SimProfile p;
    p.players = players;
    p.games_per_player = 1;
    p.labels = {{"happy", 0.30}, {"sad", 0.20}};
    p.unique_junk = 0.50;
    p.seed = seed;
    return p;
}

// Recount straight from the serialized log lines, sharing no code with the
// report.
AnnotationStats brute_force_stats(const Store& store)
{
    std::ostringstream dump;
    dump_events(store, dump);
    std::istringstream lines(dump.str());
    AnnotationStats s;
    std::set<std::string> labels;
    std::set<std::string> pairs;
    std::string line;
    while (std::getline(lines, line)) {
        const auto j = json::parse(line);
        const auto kind = j.at("kind").get<std::string>();
        const auto& payload = j.at("payload");
        if (kind == "account_created")
            ++(payload["account"]["guest"].get<bool>() ? s.guests : s.users);
        else if (kind == "snippet_added")
            ++s.snippets;
        else if (kind == "survey")
            ++s.surveys;
        else if (kind == "badge_award")
            ++s.badges_awarded;
        else if (kind == "response" && payload["counted"].get<bool>()) {
            ++s.annotations;
            const auto label = payload["label"].get<std::string>();
            labels.insert(label);
            pairs.insert(label + '\x1f' + payload["player"].get<std::string>());
        }
    }
    s.distinct_labels = static_cast<std::int64_t>(labels.size());
    s.label_user_associations = static_cast<std::int64_t>(pairs.size());
    return s;
}

// Replays counted responses in log order and promotes whenever the rule
// holds, independent of TallyBook.
std::set<std::pair<std::string, std::string>> oracle_promotions(const Store& store, const EngineConfig& cfg)
{
    std::map<std::string, std::set<std::string>> responders;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> by_label;
    std::set<std::pair<std::string, std::string>> promoted;
    for (const auto& e : store.events()) {
        if (e.kind != EventKind::response || !e.payload["counted"].get<bool>())
            continue;
        const auto snippet = e.payload["snippet"].get<std::string>();
        const auto player = e.payload["player"].get<std::string>();
        if (!responders[snippet].insert(player).second)
            continue;
        by_label[{snippet, e.payload["label"].get<std::string>()}].insert(player);
        const auto a = static_cast<std::int64_t>(responders[snippet].size());
        if (a < cfg.min_responders_for_promotion)
            continue;
        for (const auto& [key, players] : by_label)
            if (key.first == snippet &&
                static_cast<double>(players.size()) / static_cast<double>(a) >= cfg.consensus_threshold)
                promoted.insert(key);
    }
    return promoted;
}

} // namespace

TEST_SUITE("corpus-tools")
{
    TEST_CASE("ingest loads a 471-record corpus")
    {
        World w;
        const auto r = ingest(*w.store, text_corpus(471));
        CHECK(r.loaded == 471);
        CHECK(r.skipped == 0);
        const auto again = ingest(*w.store, text_corpus(471));
        CHECK(again.loaded == 0);
        CHECK(again.skipped == 471);
        w.store->read([](const State& s) {
            CHECK(s.partition(Modality::text).order.size() == 471);
            CHECK(s.snippets.at(SnippetId("lyric-000")).active);
            return 0;
        });
        CHECK(stats_report(*w.store).snippets == 471);
    }

    TEST_CASE("ingest edge cases")
    {
        World w;
        CHECK(ingest(*w.store, "").loaded == 0);
        CHECK(ingest(*w.store, "\n  \n").loaded == 0);

        const auto auto_ids = ingest(*w.store, "{\"media_uri\":\"a.mp3\"}\n{\"media_uri\":\"b.mp3\",\"active\":false}\n",
                                     Modality::audio);
        CHECK(auto_ids.loaded == 2);
        w.store->read([](const State& s) {
            CHECK(s.snippets.count(SnippetId("audio-000001")) == 1);
            CHECK_FALSE(s.snippets.at(SnippetId("audio-000002")).active);
            return 0;
        });

        std::string message;
        CHECK(ingest_error("{\"id\":\"x\",\"text\":\"ok\"}\n{\"id\":\"y\",\"text\":\"\"}\n", Modality::text, &message) ==
              ErrorCode::ParseError);
        CHECK(message.starts_with("line 2:"));
        CHECK(ingest_error("{\"id\":\"x\",\"text\":\"ok\"}\n\n{oops\n", Modality::text, &message) == ErrorCode::ParseError);
        CHECK(message.starts_with("line 3:"));
        CHECK(ingest_error("[1,2]\n", Modality::text) == ErrorCode::ParseError);
        CHECK(ingest_error("{\"id\":\"x\",\"text\":\"a\"}\n{\"id\":\"x\",\"text\":\"b\"}\n", Modality::text) ==
              ErrorCode::DuplicateId);
        CHECK(ingest_error("{\"text\":\"words\"}\n", Modality::audio) == ErrorCode::WrongModalityPayload);
        CHECK(ingest_error("{\"media_uri\":\"v.mp4\"}\n", Modality::text) == ErrorCode::WrongModalityPayload);
        CHECK(ingest_error("{\"modality\":\"video\",\"media_uri\":\"v.mp4\"}\n", Modality::audio) ==
              ErrorCode::WrongModalityPayload);
        // A failed file writes nothing.
        World clean;
        CHECK_THROWS(ingest(*clean.store, text_corpus(3) + "{\"text\":\"\"}\n"));
        CHECK(clean.store->events().empty());
    }

    TEST_CASE("retiring a snippet")
    {
        World w;
        w.add_snippets(Modality::text, 2);
        set_snippet_active(*w.store, SnippetId("text-0001"), false);
        const auto p = w.player();
        const auto g = w.engine.start_game(p, Modality::text, 3);
        for (int i = 0; i < 4; ++i)
            CHECK(w.engine.next_snippet(g.id).snippet.id.str() == "text-0000");
        CHECK(throws_code([&] { set_snippet_active(*w.store, SnippetId("nope"), true); }, ErrorCode::UnknownSnippet));
    }

    TEST_CASE("export writes one ordered line per validated annotation")
    {
        World w(EngineConfig{.min_responders_for_promotion = 2});
        w.add_snippets(Modality::text, 1);
        w.add_snippets(Modality::audio, 1);
        for (int i = 0; i < 3; ++i) {
            w.play(w.player(), Modality::text, {i == 2 ? "Blue" : "bright"});
            w.play(w.player(), Modality::audio, {"eerie"});
        }
        std::ostringstream out;
        CHECK(export_annotations(*w.store, out) == 3);
        std::istringstream lines(out.str());
        std::vector<json> rows;
        std::string line;
        while (std::getline(lines, line))
            rows.push_back(json::parse(line));
        REQUIRE(rows.size() == 3);
        CHECK(rows[0]["snippet_id"] == "audio-0000");
        CHECK(rows[0]["share"] == 1.0);
        CHECK(rows[1]["snippet_id"] == "text-0000");
        CHECK(rows[1]["label"] == "bright");
        CHECK(rows[2]["label"] == "blue");
        CHECK(rows[2]["raw_label_most_common"] == "Blue");
        // Share is frozen at promotion time.
        CHECK(rows[1]["share"] == 1.0);
        CHECK(out.str().find("\"label\":\"blue\",\"raw_label_most_common\":\"Blue\",\"share\":0.333333,\"responders\":3") !=
              std::string::npos);

        World empty;
        std::ostringstream none;
        CHECK(export_annotations(*empty.store, none) == 0);
        CHECK(none.str().empty());
    }

    TEST_CASE("dump and restore round trip")
    {
        World w;
        w.add_snippets(Modality::video, 3);
        w.play(w.player(), Modality::video, {"awe", "awe"});
        std::ostringstream dump;
        const auto n = dump_events(*w.store, dump);
        CHECK(n == w.store->events().size());
        World copy;
        std::istringstream in(dump.str());
        CHECK(restore_events(*copy.store, in) == n);
        std::istringstream again(dump.str());
        CHECK(restore_events(*copy.store, again) == 0);
        CHECK(gwap::test::partition_bytes(*copy.store, Modality::video) ==
              gwap::test::partition_bytes(*w.store, Modality::video));
    }

    TEST_CASE("report ratios on the 715-annotation fixture")
    {
        std::vector<EventRecord> events;
        std::uint64_t id = 0;
        auto push = [&](EventKind k, json payload) { events.push_back({++id, k, 0, std::move(payload)}); };
        for (int u = 0; u < 33; ++u)
            push(EventKind::account_created, {{"account", {{"id", fmt::format("u{:06}", u + 1)}, {"guest", false}}}});
        for (int g = 0; g < 53; ++g)
            push(EventKind::account_created, {{"account", {{"id", fmt::format("u{:06}", g + 34)}, {"guest", true}}}});
        for (int i = 0; i < 715; ++i)
            push(EventKind::response, {{"counted", true}, {"label", fmt::format("mood {}", i % 457)},
                                       {"player", fmt::format("u{:06}", 1 + i % 33)}});
        push(EventKind::response, {{"counted", false}, {"label", "ignored"}, {"player", "u000001"}});
        for (int b = 0; b < 43; ++b)
            push(EventKind::badge_award, json::object());

        const auto s = stats_report(events);
        CHECK(s.users == 33);
        CHECK(s.guests == 53);
        CHECK(s.annotations == 715);
        CHECK(s.distinct_labels == 457);
        CHECK(s.avg_responses_per_label == doctest::Approx(715.0 / 457.0));
        CHECK(std::round(s.avg_responses_per_label * 100) / 100 == doctest::Approx(1.56));
        CHECK(std::floor(s.avg_responses_per_label * 10) / 10 == doctest::Approx(1.5));
        CHECK(s.badges_per_user == doctest::Approx(43.0 / 33.0));
        CHECK(std::round(s.badges_per_user * 10) / 10 == doctest::Approx(1.3));
        CHECK(s.label_user_associations >= s.distinct_labels);

        const auto table = format_stats_table(s);
        CHECK(table.find("annotations") != std::string::npos);
        CHECK(table.find("1.565") != std::string::npos);
    }

    TEST_CASE("report on an empty store is all zeros")
    {
        World w;
        const auto s = stats_report(*w.store);
        CHECK(json(s) == json(AnnotationStats{}));
        const json fields = s;
        for (const auto& [key, value] : fields.items())
            CHECK_MESSAGE(value == 0, key);
    }

    TEST_CASE("property: label-user associations never undercount distinct labels")
    {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            World w(EngineConfig{}, seed);
            w.add_snippets(Modality::text, 30);
            SimProfile p = mixed_profile(8, seed);
            p.games_per_player = 2;
            simulate(*w.store, p);
            const auto s = stats_report(*w.store);
            CHECK(s.label_user_associations >= s.distinct_labels);
            CHECK(s.label_user_associations <= s.annotations);
        }
    }

    TEST_CASE("expected contribution")
    {
        CHECK(expected_contribution(0, 5.0) == 0.0);
        CHECK(expected_contribution(120, 0.5) == 60.0);
        CHECK(throws_code([] { (void)expected_contribution(-1, 1); }, ErrorCode::NegativeInput));
        CHECK(throws_code([] { (void)expected_contribution(1, -0.5); }, ErrorCode::NegativeInput));
        CHECK(throws_code([] { (void)expected_contribution(std::nan(""), 1); }, ErrorCode::NegativeInput));
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> d(0, 1000);
        for (int i = 0; i < 1000; ++i) {
            const double t = d(rng), h = d(rng);
            CHECK(expected_contribution(2 * t, h) == doctest::Approx(2 * expected_contribution(t, h)));
            CHECK(expected_contribution(t, 2 * h) == doctest::Approx(2 * expected_contribution(t, h)));
        }
    }

    TEST_CASE("profile validation")
    {
        auto ok = mixed_profile(4, 1);
        CHECK_NOTHROW(validate_profile(ok));
        auto bad = ok;
        bad.labels["happy"] = 0.31;
        CHECK(throws_code([&] { validate_profile(bad); }, ErrorCode::InvalidProfile));
        bad = ok;
        bad.labels["sad"] = -0.1;
        bad.unique_junk = 0.8;
        CHECK(throws_code([&] { validate_profile(bad); }, ErrorCode::InvalidProfile));
        bad = ok;
        bad.players = 0;
        CHECK(throws_code([&] { validate_profile(bad); }, ErrorCode::InvalidProfile));
        bad = ok;
        bad.unique_junk = std::numeric_limits<double>::infinity();
        CHECK(throws_code([&] { validate_profile(bad); }, ErrorCode::InvalidProfile));
        bad = ok;
        bad.labels = {{"Happy", 0.5}};
        CHECK(throws_code([&] { validate_profile(bad); }, ErrorCode::InvalidProfile));

        SimProfile flat;
        load_distribution(json{{"happy", 0.3}, {"sad", 0.2}, {"unique-junk", 0.5}}, flat);
        CHECK(flat.labels.size() == 2);
        CHECK(flat.unique_junk == 0.5);
        SimProfile nested;
        load_distribution(json{{"labels", {{"happy", 1.0}}}}, nested);
        CHECK(nested.labels.at("happy") == 1.0);
        CHECK(nested.unique_junk == 0.0);
        SimProfile broken;
        CHECK_THROWS_AS(load_distribution(json{{"happy", "lots"}}, broken), Error);
    }

    TEST_CASE("simulate refuses an empty corpus")
    {
        World w;
        w.add_snippets(Modality::audio, 3);
        CHECK(throws_code([&] { simulate(*w.store, mixed_profile(3, 1)); }, ErrorCode::EmptyCorpus));
        auto invalid = mixed_profile(3, 1);
        invalid.unique_junk = 0.9;
        CHECK(throws_code([&] { simulate(*w.store, invalid); }, ErrorCode::InvalidProfile));
    }

    TEST_CASE("simulated promotions match an independent recount")
    {
        World w(EngineConfig{.consensus_threshold = 0.25});
        w.add_snippets(Modality::text, 20);
        const auto summary = simulate(*w.store, mixed_profile(40, 2024));
        CHECK(summary.players == 40);
        CHECK(summary.games == 40);
        CHECK(summary.responses == 400);

        const auto oracle = oracle_promotions(*w.store, w.store->config());
        std::set<std::pair<std::string, std::string>> logged;
        for (const auto& e : w.store->events())
            if (e.kind == EventKind::promotion)
                logged.emplace(e.payload["snippet_id"].get<std::string>(), e.payload["label"].get<std::string>());
        CHECK(logged == oracle);
        CHECK(summary.promotions == static_cast<std::int64_t>(oracle.size()));
        std::map<std::string, std::int64_t> by_label;
        std::set<std::string> snippets;
        for (const auto& [snippet, label] : oracle) {
            ++by_label[label];
            snippets.insert(snippet);
        }
        CHECK(summary.promotions_by_label == by_label);
        CHECK(summary.snippets_with_promotion == static_cast<std::int64_t>(snippets.size()));
        CHECK(by_label["happy"] > 0);
        for (const auto& [label, n] : by_label)
            CHECK_MESSAGE((label == "happy" || label == "sad"), label);

        std::ostringstream out;
        CHECK(export_annotations(*w.store, out) == oracle.size());
        CHECK(json(summary)["promotions"] == summary.promotions);
    }

    TEST_CASE("a lone simulated player promotes nothing")
    {
        World w;
        w.add_snippets(Modality::text, 15);
        auto p = mixed_profile(1, 3);
        p.games_per_player = 3;
        const auto summary = simulate(*w.store, p);
        CHECK(summary.promotions == 0);
        CHECK(summary.responses == 30);
        CHECK(oracle_promotions(*w.store, w.store->config()).empty());
    }

    TEST_CASE("simulation is deterministic per seed")
    {
        auto run = [](std::uint64_t seed) {
            World w;
            w.add_snippets(Modality::text, 25);
            auto p = mixed_profile(12, seed);
            p.games_per_player = 2;
            const auto summary = simulate(*w.store, p);
            std::ostringstream dump;
            dump_events(*w.store, dump);
            std::ostringstream exported;
            export_annotations(*w.store, exported);
            return std::tuple{json(summary).dump(), dump.str(), exported.str()};
        };
        const auto a = run(77);
        const auto b = run(77);
        CHECK(std::get<0>(a) == std::get<0>(b));
        CHECK(std::get<1>(a) == std::get<1>(b));
        CHECK(std::get<2>(a) == std::get<2>(b));
        const auto c = run(78);
        CHECK(std::get<1>(a) != std::get<1>(c));
    }

    TEST_CASE("property: simulated stores reconcile and match the brute-force report")
    {
        for (std::uint64_t seed = 10; seed < 16; ++seed) {
            World w(EngineConfig{.min_responders_for_promotion = 3}, seed);
            w.add_snippets(Modality::text, 12);
            auto p = mixed_profile(6 + static_cast<std::int64_t>(seed % 4), seed);
            p.games_per_player = 1 + static_cast<std::int64_t>(seed % 3);
            simulate(*w.store, p);
            const auto fast = stats_report(*w.store);
            const auto slow = brute_force_stats(*w.store);
            CHECK(fast.users == slow.users);
            CHECK(fast.guests == slow.guests);
            CHECK(fast.snippets == slow.snippets);
            CHECK(fast.surveys == slow.surveys);
            CHECK(fast.badges_awarded == slow.badges_awarded);
            CHECK(fast.annotations == slow.annotations);
            CHECK(fast.distinct_labels == slow.distinct_labels);
            CHECK(fast.label_user_associations == slow.label_user_associations);
            CHECK(reconcile(*w.store).clean());
            const auto events = w.store->events();
            const auto logged = std::count_if(events.begin(), events.end(),
                                              [](const EventRecord& e) { return e.kind == EventKind::promotion; });
            CHECK(oracle_promotions(*w.store, w.store->config()).size() == static_cast<std::size_t>(logged));
        }
    }
}
