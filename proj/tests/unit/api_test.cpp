#include <doctest.h>

#include <chrono>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "fixtures.hpp"
#include "gwap/api.hpp"

using namespace gwap;
using nlohmann::json;

namespace {

constexpr auto kAdmin = "admin-secret-0123456789";

ServiceConfig test_config()
{
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.admin_token = kAdmin;
    cfg.test_mode = true;
    cfg.rng_seed = 5;
    cfg.accounts.password_strength = PasswordStrength::minimal;
    return cfg;
}

struct Api
{
    ApiService service;
    int next_email = 0;

    explicit Api(ServiceConfig cfg = test_config())
        : service(std::move(cfg), std::make_shared<ManualClock>())
    {
    }

    ApiResponse call(const std::string& method, const std::string& path, const json& body = nullptr,
                     const std::string& token = {})
    {
        ApiRequest r;
        r.method = method;
        const auto q = path.find('?');
        r.path = "/api/v1" + path.substr(0, q);
        if (q != std::string::npos) {
            std::string rest = path.substr(q + 1);
            std::size_t start = 0;
            while (start <= rest.size()) {
                auto amp = rest.find('&', start);
                if (amp == std::string::npos)
                    amp = rest.size();
                const auto kv = rest.substr(start, amp - start);
                const auto eq = kv.find('=');
                r.query.emplace(kv.substr(0, eq), eq == std::string::npos ? "" : kv.substr(eq + 1));
                start = amp + 1;
            }
        }
        if (!token.empty())
            r.authorization = "Bearer " + token;
        r.body = body.is_null() ? "" : body.dump();
        return service.handle(r);
    }

    std::string player_token(const std::string& display_name = {})
    {
        const auto email = fmt::format("p{}@example.org", ++next_email);
        json body{{"email", email}, {"password", "good password"}, {"info_sheet_ack", true}};
        if (!display_name.empty())
            body["display_name"] = display_name;
        const auto reg = call("POST", "/register", body);
        REQUIRE(reg.status == 201);
        const auto act = call("POST", "/activate", {{"token", reg.body["activation_token"]}});
        REQUIRE(act.status == 200);
        return act.body["token"].get<std::string>();
    }

    std::string guest_token()
    {
        const auto g = call("POST", "/guest");
        REQUIRE(g.status == 201);
        return g.body["token"].get<std::string>();
    }

    void corpus(Modality m, int n)
    {
        std::ostringstream s;
        for (int i = 0; i < n; ++i)
            s << json{{"id", fmt::format("{}-{:04}", to_string(m), i)},
                      {m == Modality::text ? "text" : "media_uri", fmt::format("body {}", i)}}
                     .dump()
              << '\n';
        std::istringstream in(s.str());
        ingest_corpus(service.store(), in, m);
    }

    std::string start(const std::string& token, const std::string& modality = "text")
    {
        const auto r = call("POST", "/games", {{"modality", modality}, {"mood_rating", 4}}, token);
        REQUIRE(r.status == 201);
        return r.body["id"].get<std::string>();
    }

    ApiResponse answer(const std::string& token, const std::string& game, const std::string& label)
    {
        const auto s = call("GET", "/games/" + game + "/snippet", nullptr, token);
        REQUIRE(s.status == 200);
        return call("POST", "/games/" + game + "/responses", {{"label", label}}, token);
    }
};

std::string code_of(const ApiResponse& r) { return r.body["error"]["code"].get<std::string>(); }

} // namespace

TEST_SUITE("api-service")
{
    TEST_CASE("every engine error has exactly one wire code and a sensible status")
    {
        std::set<std::string_view> wires;
        for (auto code : all_error_codes()) {
            CHECK(wires.insert(wire_code(code)).second);
            const auto status = http_status(code);
            CHECK(status >= 400);
            CHECK(status < 600);
            const auto r = error_response(code, "m");
            CHECK(r.status == status);
            CHECK(r.body["error"]["code"] == std::string(wire_code(code)));
            CHECK(r.body["error"]["message"] == "m");
        }
        CHECK(http_status(ErrorCode::SessionAlreadyActive) == 409);
        CHECK(http_status(ErrorCode::Unauthenticated) == 401);
        CHECK(http_status(ErrorCode::Forbidden) == 403);
        CHECK(http_status(ErrorCode::EmptyLabel) / 100 == 4);
    }

    TEST_CASE("a full game over the wire")
    {
        Api api;
        api.corpus(Modality::text, 5);
        const auto token = api.player_token("Callas");
        const auto profile = api.call("GET", "/profile", nullptr, token);
        CHECK(profile.status == 200);
        CHECK(profile.body["display_name"] == "Callas");

        const auto game = api.start(token);
        const auto snippet = api.call("GET", "/games/" + game + "/snippet", nullptr, token);
        CHECK(snippet.status == 200);
        CHECK(snippet.body["counted"] == true);
        const auto resp = api.call("POST", "/games/" + game + "/responses",
                                   {{"label", "Longing"}, {"snippet_id", snippet.body["snippet"]["id"]}}, token);
        REQUIRE(resp.status == 201);
        CHECK(resp.body["breakdown"]["final"] == 100);
        CHECK(resp.body["response"]["label"] == "longing");
        CHECK(resp.body["game_score"] == 100);
        CHECK_FALSE(resp.body["messages"].empty());

        const auto end = api.call("POST", "/games/" + game + "/end", nullptr, token);
        CHECK(end.status == 200);
        CHECK(end.body["game_score"] == 100);
        const auto again = api.call("POST", "/games/" + game + "/end", nullptr, token);
        CHECK(again.body == end.body);

        const auto board = api.call("GET", "/leaderboard", nullptr);
        CHECK(board.status == 200);
        REQUIRE(board.body["entries"].size() == 1);
        CHECK(board.body["entries"][0]["display_name"] == "Callas");
        const auto me = api.call("GET", "/stats/me?modality=text", nullptr, token);
        CHECK(me.body["stats"]["total_score"] == 100);
        CHECK(me.body["rank"] == 1);
        const auto badges = api.call("GET", "/badges/progress", nullptr, token);
        CHECK(badges.status == 200);
        CHECK(badges.body["badges"].size() == 10);
    }

    TEST_CASE("error mapping examples")
    {
        Api api;
        api.corpus(Modality::text, 3);
        const auto token = api.player_token();
        const auto game = api.start(token);
        api.call("GET", "/games/" + game + "/snippet", nullptr, token);

        auto r = api.call("POST", "/games/" + game + "/responses", {{"label", "   "}}, token);
        CHECK(r.status == 422);
        CHECK(code_of(r) == "EMPTY_LABEL");

        r = api.call("POST", "/games", {{"modality", "text"}, {"mood_rating", 2}}, token);
        CHECK(r.status == 409);
        CHECK(code_of(r) == "SESSION_ALREADY_ACTIVE");

        r = api.call("POST", "/games", {{"modality", "audio"}, {"mood_rating", 6}}, token);
        CHECK(code_of(r) == "INVALID_MOOD_RATING");
        r = api.call("POST", "/games", {{"modality", "smell"}, {"mood_rating", 3}}, token);
        CHECK(code_of(r) == "INVALID_MODALITY");
        r = api.call("POST", "/games", {{"modality", "audio"}, {"mood_rating", 3}}, token);
        CHECK(r.status == 201);
        r = api.call("GET", "/games/" + r.body["id"].get<std::string>() + "/snippet", nullptr, token);
        CHECK(code_of(r) == "EMPTY_CORPUS");

        r = api.call("GET", "/games/g999999/snippet", nullptr, token);
        CHECK(code_of(r) == "UNKNOWN_SESSION");
        r = api.call("GET", "/nowhere", nullptr, token);
        CHECK(r.status == 404);
        CHECK(code_of(r) == "NOT_FOUND");
        r = api.call("GET", "/leaderboard?limit=0");
        CHECK(code_of(r) == "INVALID_ARGUMENT");
        r = api.call("GET", "/leaderboard?limit=abc");
        CHECK(r.status == 400);
        r = api.call("POST", "/register", {{"email", "x@example.org"}, {"password", "good password"}});
        CHECK(code_of(r) == "INFO_SHEET_NOT_ACKNOWLEDGED");
        r = api.call("POST", "/register", {{"email", "p1@example.org"}, {"password", "good password"}, {"info_sheet_ack", true}});
        CHECK(code_of(r) == "EMAIL_IN_USE");
        r = api.call("POST", "/login", {{"email", "p1@example.org"}, {"password", "bad password"}});
        CHECK(code_of(r) == "INVALID_CREDENTIALS");
    }

    TEST_CASE("login before activation is refused")
    {
        Api api;
        const auto reg = api.call("POST", "/register", {{"email", "late@example.org"}, {"password", "good password"},
                                                        {"info_sheet_acknowledged", true}});
        REQUIRE(reg.status == 201);
        CHECK(reg.body["account"]["activated"] == false);
        auto r = api.call("POST", "/login", {{"email", "late@example.org"}, {"password", "good password"}});
        CHECK(code_of(r) == "NOT_ACTIVATED");
        REQUIRE(api.service.outbox().messages().size() == 1);
        CHECK(api.service.outbox().messages()[0].token == reg.body["activation_token"]);
        r = api.call("POST", "/activate", {{"token", reg.body["activation_token"]}});
        CHECK(r.status == 200);
        r = api.call("POST", "/login", {{"email", "late@example.org"}, {"password", "good password"}});
        CHECK(r.status == 200);
        CHECK(r.body["guest"] == false);
    }

    TEST_CASE("authentication and authorization")
    {
        Api api;
        api.corpus(Modality::text, 3);
        const auto alice = api.player_token();
        const auto bob = api.player_token();
        const auto game = api.start(alice);

        auto r = api.call("GET", "/profile");
        CHECK(r.status == 401);
        CHECK(code_of(r) == "UNAUTHENTICATED");
        r = api.call("GET", "/profile", nullptr, "forged");
        CHECK(r.status == 401);

        r = api.call("GET", "/games/" + game + "/snippet", nullptr, bob);
        CHECK(r.status == 403);
        r = api.call("POST", "/games/" + game + "/end", nullptr, bob);
        CHECK(r.status == 403);

        r = api.call("GET", "/admin/annotations/export", nullptr, alice);
        CHECK(r.status == 403);
        CHECK(code_of(r) == "FORBIDDEN");
        r = api.call("GET", "/admin/annotations/export");
        CHECK(r.status == 401);
        r = api.call("GET", "/admin/report", nullptr, alice);
        CHECK(r.status == 403);
        r = api.call("GET", "/admin/annotations/export", nullptr, kAdmin);
        CHECK(r.status == 200);
        CHECK(r.content_type == "application/x-ndjson");
        r = api.call("GET", "/admin/report?format=table", nullptr, kAdmin);
        CHECK(r.status == 200);
        CHECK(r.raw->find("users") != std::string::npos);
        r = api.call("GET", "/admin/report", nullptr, kAdmin);
        CHECK(r.body["users"] == 2);
        r = api.call("GET", "/admin/reconcile", nullptr, kAdmin);
        CHECK(r.body["divergences"].empty());

        ServiceConfig no_admin = test_config();
        no_admin.admin_token.clear();
        Api closed(no_admin);
        r = closed.call("GET", "/admin/report", nullptr, "anything-at-all-here");
        CHECK(r.status == 403);
    }

    TEST_CASE("the token, not the payload, decides who scores")
    {
        Api api;
        api.corpus(Modality::text, 3);
        const auto alice = api.player_token("Alice");
        const auto bob = api.player_token("Bob");
        const auto bob_id = api.call("GET", "/profile", nullptr, bob).body["id"];
        const auto game = api.start(alice);
        api.call("GET", "/games/" + game + "/snippet", nullptr, alice);
        const auto r = api.call("POST", "/games/" + game + "/responses",
                                {{"label", "glad"}, {"player", bob_id}, {"player_id", bob_id}}, alice);
        REQUIRE(r.status == 201);
        CHECK(r.body["response"]["player"] != bob_id);
        CHECK(api.call("GET", "/stats/me", nullptr, bob).body["stats"]["total_score"] == 0);
        CHECK(api.call("GET", "/stats/me", nullptr, alice).body["stats"]["total_score"] == 100);
    }

    TEST_CASE("guests play and score but never appear on boards")
    {
        Api api;
        api.corpus(Modality::text, 4);
        const auto guest = api.guest_token();
        const auto game = api.start(guest);
        for (const auto* label : {"joy", "joy", "fear"}) {
            const auto r = api.answer(guest, game, label);
            REQUIRE(r.status == 201);
            CHECK(r.body["breakdown"]["final"] == 100);
            CHECK(r.body["new_badges"].empty());
        }
        const auto end = api.call("POST", "/games/" + game + "/end", nullptr, guest);
        CHECK(end.body["game_score"] == 300);
        CHECK(end.body["rank"].is_null());
        CHECK(api.call("GET", "/leaderboard", nullptr).body["entries"].empty());
        CHECK(api.call("GET", "/leaderboard?modality=text", nullptr).body["entries"].empty());
        const auto me = api.call("GET", "/stats/me", nullptr, guest);
        CHECK(me.body["guest"] == true);
        CHECK(me.body["stats"].is_null());
        CHECK(api.call("GET", "/badges/progress", nullptr, guest).body["badges"].empty());
        CHECK(api.call("PUT", "/profile", {{"privacy", true}}, guest).status == 403);

        const auto player = api.player_token("Named");
        const auto g2 = api.start(player);
        api.answer(player, g2, "joy");
        CHECK(api.call("GET", "/leaderboard", nullptr).body["entries"].empty());
        api.call("POST", "/games/" + g2 + "/end", nullptr, player);
        const auto board = api.call("GET", "/leaderboard", nullptr).body["entries"];
        REQUIRE(board.size() == 1);
        CHECK(board[0]["display_name"] == "Named");
    }

    TEST_CASE("profile edits over the wire")
    {
        Api api;
        const auto token = api.player_token();
        auto r = api.call("PUT", "/profile", {{"age", 30}, {"languages", {"en", "el"}}, {"privacy", true}, {"avatar", "lyre"}}, token);
        CHECK(r.status == 200);
        CHECK(r.body["age"] == 30);
        CHECK(r.body["privacy"] == true);
        r = api.call("PUT", "/profile", {{"age", nullptr}, {"avatar", nullptr}}, token);
        CHECK(r.body["age"].is_null());
        CHECK(r.body["avatar"].is_null());
        CHECK(r.body["languages"] == json({"en", "el"}));
        r = api.call("PUT", "/profile", {{"age", 400}}, token);
        CHECK(code_of(r) == "INVALID_PROFILE");
        r = api.call("PUT", "/profile", {{"privacy", "yes"}}, token);
        CHECK(r.status == 400);
    }

    TEST_CASE("property: malformed input never yields a 5xx")
    {
        Api api;
        api.corpus(Modality::text, 5);
        const auto token = api.player_token();
        const auto game = api.start(token);
        const std::vector<std::pair<std::string, std::string>> routes{
            {"POST", "/register"}, {"POST", "/activate"}, {"POST", "/login"}, {"POST", "/guest"},
            {"PUT", "/profile"}, {"POST", "/games"}, {"POST", "/games/" + game + "/responses"},
            {"POST", "/games/" + game + "/end"}, {"GET", "/games/" + game + "/snippet"},
            {"GET", "/leaderboard"}, {"DELETE", "/games/" + game}, {"GET", "/games/" + game + "/x/y"}};
        const std::vector<json> shapes{nullptr, 1, -3.5, "str", json::array(), json::object(), true,
                                       json::array({1, 2}), json{{"nested", json::object()}}, std::string(300, 'z')};
        const std::vector<std::string> keys{"email", "password", "token", "label", "modality", "mood_rating", "age",
                                            "languages", "privacy", "avatar", "snippet_id", "info_sheet_ack", "display_name"};
        std::mt19937_64 rng(42);
        auto random_bytes = [&] {
            std::string s;
            const auto n = rng() % 40;
            for (std::size_t i = 0; i < n; ++i)
                s.push_back(static_cast<char>(rng() % 256));
            return s;
        };
        int checked = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto& [method, path] = routes[rng() % routes.size()];
            ApiRequest r;
            r.method = method;
            r.path = "/api/v1" + path;
            r.authorization = rng() % 4 == 0 ? "" : "Bearer " + token;
            switch (rng() % 3) {
            case 0:
                r.body = random_bytes();
                break;
            case 1:
                r.body = shapes[rng() % shapes.size()].dump();
                break;
            default: {
                json body = json::object();
                const auto fields = rng() % 4;
                for (std::size_t f = 0; f < fields; ++f)
                    body[keys[rng() % keys.size()]] = shapes[rng() % shapes.size()];
                r.body = body.dump();
            }
            }
            if (rng() % 5 == 0)
                r.query.emplace(rng() % 2 ? "limit" : "modality", random_bytes());
            const auto out = api.service.handle(r);
            CHECK_MESSAGE(out.status < 500, method, " ", path, " ", r.body, " -> ", out.text());
            if (out.status >= 400)
                CHECK(out.body["error"]["code"].is_string());
            CHECK_NOTHROW((void)out.text());
            ++checked;
        }
        CHECK(checked == 1000);
    }

    TEST_CASE("service config parsing")
    {
        const auto cfg = parse_service_config(json{{"port", 9000}, {"admin_token", kAdmin},
                                                   {"engine", {{"consensus_threshold", 0.5}}},
                                                   {"test_mode", true}, {"rng_seed", 11}});
        CHECK(cfg.port == 9000);
        CHECK(cfg.engine.consensus_threshold == 0.5);
        CHECK(cfg.rng_seed == 11u);
        CHECK(gwap::test::throws_code([] { (void)parse_service_config(json{{"port", 70000}}); }, ErrorCode::ConfigOutOfRange));
        CHECK(gwap::test::throws_code([] { (void)parse_service_config(json{{"admin_token", "short"}}); }, ErrorCode::ConfigOutOfRange));
        CHECK(gwap::test::throws_code([] { (void)parse_service_config(json{{"engine", {{"base_points", -1}}}}); }, ErrorCode::ConfigOutOfRange));
        CHECK(gwap::test::throws_code([] { (void)parse_service_config(json{{"port", "eighty"}}); }, ErrorCode::ParseError));
    }

    TEST_CASE("the HTTP server speaks the same contract")
    {
        ApiService service(test_config());
        std::istringstream corpus(R"({"id":"text-0000","text":"Casta diva"})" "\n");
        ingest_corpus(service.store(), corpus, Modality::text);
        std::thread server([&] { service.listen(); });
        for (int i = 0; i < 500 && !service.running(); ++i)
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        REQUIRE(service.running());

        httplib::Client client("127.0.0.1", service.bound_port());
        auto guest = client.Post("/api/v1/guest", "", "application/json");
        REQUIRE(guest);
        CHECK(guest->status == 201);
        const auto token = json::parse(guest->body)["token"].get<std::string>();
        const httplib::Headers auth{{"Authorization", "Bearer " + token}};

        auto game = client.Post("/api/v1/games", auth, R"({"modality":"text","mood_rating":5})", "application/json");
        REQUIRE(game);
        CHECK(game->status == 201);
        const auto id = json::parse(game->body)["id"].get<std::string>();
        auto snippet = client.Get(("/api/v1/games/" + id + "/snippet").c_str(), auth);
        REQUIRE(snippet);
        CHECK(json::parse(snippet->body)["snippet"]["text"] == "Casta diva");
        auto resp = client.Post(("/api/v1/games/" + id + "/responses").c_str(), auth, R"({"label":"Serene"})",
                                "application/json");
        REQUIRE(resp);
        CHECK(resp->status == 201);
        CHECK(json::parse(resp->body)["breakdown"]["final"] == 100);

        auto bad = client.Post("/api/v1/games", auth, "{not json", "application/json");
        REQUIRE(bad);
        CHECK(bad->status == 400);
        CHECK(json::parse(bad->body)["error"]["code"] == "MALFORMED_REQUEST");

        auto big = client.Post("/api/v1/login", std::string(200 * 1024, 'x'), "application/json");
        REQUIRE(big);
        CHECK(big->status == 413);
        CHECK(json::parse(big->body)["error"]["code"].is_string());

        auto missing = client.Get("/elsewhere");
        REQUIRE(missing);
        CHECK(missing->status == 404);

        auto board = client.Get("/api/v1/leaderboard?modality=text&limit=5");
        REQUIRE(board);
        CHECK(json::parse(board->body)["entries"].empty());
        auto exported = client.Get("/api/v1/admin/annotations/export", httplib::Headers{{"Authorization", std::string("Bearer ") + kAdmin}});
        REQUIRE(exported);
        CHECK(exported->status == 200);

        service.stop();
        server.join();
    }
}
