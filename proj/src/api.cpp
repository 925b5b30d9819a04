#include "gwap/api.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>

#include "gwap/corpus.hpp"
#include "gwap/errors.hpp"
#include "gwap/reconcile.hpp"
#include "gwap/report.hpp"

namespace gwap {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedRequest, what); }

json parse_body(const std::string& body)
{
    if (body.empty())
        return json::object();
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded())
        malformed("request body is not valid JSON");
    if (!j.is_object())
        malformed("request body must be a JSON object");
    return j;
}

bool present(const json& j, const char* key) { return j.contains(key) && !j[key].is_null(); }

std::optional<std::string> string_field(const json& j, const char* key)
{
    if (!present(j, key))
        return std::nullopt;
    if (!j[key].is_string())
        malformed(fmt::format("'{}' must be a string", key));
    return j[key].get<std::string>();
}

std::string required_string(const json& j, const char* key)
{
    auto v = string_field(j, key);
    if (!v)
        malformed(fmt::format("'{}' is required", key));
    return *v;
}

std::optional<std::int64_t> int_field(const json& j, const char* key)
{
    if (!present(j, key))
        return std::nullopt;
    const auto& v = j[key];
    if (v.is_number_unsigned()) {
        if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            return std::numeric_limits<std::int64_t>::max();
        return static_cast<std::int64_t>(v.get<std::uint64_t>());
    }
    if (!v.is_number_integer())
        malformed(fmt::format("'{}' must be an integer", key));
    return v.get<std::int64_t>();
}

std::optional<bool> bool_field(const json& j, const char* key)
{
    if (!present(j, key))
        return std::nullopt;
    if (!j[key].is_boolean())
        malformed(fmt::format("'{}' must be true or false", key));
    return j[key].get<bool>();
}

std::optional<std::vector<std::string>> string_list(const json& j, const char* key)
{
    if (!present(j, key))
        return std::nullopt;
    if (!j[key].is_array())
        malformed(fmt::format("'{}' must be a list of strings", key));
    std::vector<std::string> out;
    for (const auto& v : j[key]) {
        if (!v.is_string())
            malformed(fmt::format("'{}' must be a list of strings", key));
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::optional<int> small_int(std::optional<std::int64_t> v, ErrorCode code, const char* what, std::int64_t lo,
                             std::int64_t hi)
{
    if (!v)
        return std::nullopt;
    if (*v < lo || *v > hi)
        throw Error(code, fmt::format("{} must be between {} and {}", what, lo, hi));
    return static_cast<int>(*v);
}

std::optional<std::string> query_param(const ApiRequest& r, const std::string& key)
{
    auto it = r.query.find(key);
    if (it == r.query.end())
        return std::nullopt;
    return it->second;
}

Scope parse_scope(const std::optional<std::string>& modality)
{
    if (!modality || modality->empty() || *modality == "global")
        return std::nullopt;
    return parse_modality(*modality);
}

std::int64_t parse_limit(const std::optional<std::string>& text, std::int64_t fallback)
{
    if (!text || text->empty())
        return fallback;
    std::int64_t v = 0;
    const auto* end = text->data() + text->size();
    auto [ptr, ec] = std::from_chars(text->data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw Error(ErrorCode::InvalidArgument, "limit must be an integer");
    if (v < 1 || v > 1000)
        throw Error(ErrorCode::InvalidArgument, "limit must be between 1 and 1000");
    return v;
}

std::vector<std::string> split_path(std::string_view path)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
        const auto j = path.find('/', i);
        const auto part = path.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i);
        if (!part.empty())
            out.emplace_back(part);
        if (j == std::string_view::npos)
            break;
        i = j + 1;
    }
    return out;
}

bool constant_time_equal(std::string_view a, std::string_view b)
{
    unsigned char diff = a.size() == b.size() ? 0 : 1;
    for (std::size_t i = 0; i < b.size(); ++i)
        diff |= static_cast<unsigned char>(a[i % std::max<std::size_t>(a.size(), 1)] ^ b[i]);
    return diff == 0 && !a.empty();
}

json token_json(const AuthToken& t)
{
    return {{"token", t.token}, {"player", t.player}, {"expires_at", t.expires_at}, {"guest", t.guest}};
}

ApiResponse ok(json body, int status = 200) { return {status, std::move(body), std::nullopt, "application/json"}; }

} // namespace

std::string ApiResponse::text() const
{
    if (raw)
        return *raw;
    return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

ApiResponse error_response(ErrorCode code, const std::string& message)
{
    return {http_status(code),
            json{{"error", {{"code", wire_code(code)}, {"message", sanitize_utf8(message)}}}},
            std::nullopt,
            "application/json"};
}

ServiceConfig parse_service_config(const json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::ParseError, "service config must be a JSON object");
    ServiceConfig cfg;
    auto bad = [](const std::string& what) { throw Error(ErrorCode::ConfigOutOfRange, what); };
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "bind")
                cfg.bind = v.get<std::string>();
            else if (key == "port") {
                const auto port = v.get<std::int64_t>();
                if (port < 0 || port > 65535)
                    bad("port out of range");
                cfg.port = static_cast<int>(port);
            } else if (key == "store_path")
                cfg.store_path = v.get<std::string>();
            else if (key == "admin_token")
                cfg.admin_token = v.get<std::string>();
            else if (key == "engine")
                cfg.engine = merge_config(cfg.engine, v);
            else if (key == "test_mode")
                cfg.test_mode = v.get<bool>();
            else if (key == "rng_seed")
                cfg.rng_seed = v.get<std::uint64_t>();
            else if (key == "token_ttl_hours" || key == "activation_ttl_hours") {
                const auto hours = v.get<double>();
                if (!(hours > 0) || hours > 24.0 * 365)
                    bad(fmt::format("{} out of range", key));
                auto& slot = key == "token_ttl_hours" ? cfg.accounts.token_ttl_ms : cfg.accounts.activation_ttl_ms;
                slot = static_cast<Timestamp>(hours * 3600.0 * 1000.0);
            } else if (key == "password_strength") {
                const auto s = v.get<std::string>();
                if (s == "interactive")
                    cfg.accounts.password_strength = PasswordStrength::interactive;
                else if (s == "minimal")
                    cfg.accounts.password_strength = PasswordStrength::minimal;
                else
                    bad("password_strength must be \"interactive\" or \"minimal\"");
            } else if (key == "surface_activation_tokens")
                cfg.surface_activation_tokens = v.get<bool>();
            else if (key == "max_body_bytes")
                cfg.max_body_bytes = v.get<std::size_t>();
            else
                bad(fmt::format("unknown service config key '{}'", key));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, fmt::format("service config: {}", e.what()));
    }
    if (cfg.rng_seed && !cfg.test_mode)
        bad("rng_seed is only allowed with test_mode");
    if (cfg.admin_token.size() > 0 && cfg.admin_token.size() < 16)
        bad("admin_token must be at least 16 characters");
    validate_config(cfg.engine);
    return cfg;
}

ServiceConfig load_service_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::NotFound, fmt::format("cannot open config file '{}'", path));
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorCode::ParseError, fmt::format("'{}' is not valid JSON", path));
    return parse_service_config(j);
}

ApiService::ApiService(ServiceConfig cfg, std::shared_ptr<Clock> clock, std::unique_ptr<EventLog> log)
    : cfg_(std::move(cfg)), clock_(clock ? std::move(clock) : std::make_shared<SystemClock>())
{
    if (!log) {
        if (cfg_.store_path.empty())
            log = std::make_unique<MemoryEventLog>();
        else
            log = std::make_unique<SqliteEventLog>(cfg_.store_path);
    }
    store_ = std::make_unique<Store>(std::move(log), cfg_.engine, clock_);

    std::uint64_t seed = 0;
    if (cfg_.test_mode && cfg_.rng_seed) {
        seed = *cfg_.rng_seed;
        secrets_ = std::make_unique<SeededSecretSource>(seed);
    } else {
        secrets_ = std::make_unique<SystemSecretSource>();
        std::array<unsigned char, 8> bytes{};
        secrets_->fill(bytes);
        for (auto b : bytes)
            seed = (seed << 8) | b;
    }
    accounts_ = std::make_unique<AccountService>(*store_, *secrets_, cfg_.accounts);
    outbox_ = std::make_shared<OutboxMailTransport>();
    accounts_->set_mail_transport(outbox_);
    engine_ = std::make_unique<SessionEngine>(*store_, seed);
}

ApiService::~ApiService() { stop(); }

ApiResponse ApiService::handle(const ApiRequest& request)
{
    try {
        return dispatch(request);
    } catch (const Error& e) {
        return error_response(e.code(), e.what());
    } catch (const json::exception& e) {
        return error_response(ErrorCode::MalformedRequest, e.what());
    } catch (const std::exception& e) {
        return error_response(ErrorCode::Internal, e.what());
    }
}

ApiResponse ApiService::dispatch(const ApiRequest& r)
{
    const auto parts = split_path(r.path);
    if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1")
        throw Error(ErrorCode::NotFound, "no such endpoint");
    const std::vector<std::string> seg(parts.begin() + 2, parts.end());
    const auto& m = r.method;
    auto is = [&](std::string_view method, std::initializer_list<std::string_view> pattern) {
        if (m != method || seg.size() != pattern.size())
            return false;
        std::size_t i = 0;
        for (auto p : pattern) {
            if (p != "*" && p != seg[i])
                return false;
            ++i;
        }
        return true;
    };

    std::string bearer;
    if (r.authorization.starts_with("Bearer "))
        bearer = r.authorization.substr(7);
    auto principal = [&]() {
        auto who = bearer.empty() ? std::nullopt : accounts_->authenticate(bearer);
        if (!who)
            throw Error(ErrorCode::Unauthenticated, "a valid bearer token is required");
        return *who;
    };
    auto require_admin = [&]() {
        if (bearer.empty())
            throw Error(ErrorCode::Unauthenticated, "admin credential required");
        if (cfg_.admin_token.empty() || !constant_time_equal(cfg_.admin_token, bearer))
            throw Error(ErrorCode::Forbidden, "admin role required");
    };
    auto owned_session = [&](const Principal& who, const std::string& id) {
        const SessionId sid(id);
        const auto s = engine_->session(sid);
        if (s.player != who.player)
            throw Error(ErrorCode::Forbidden, "this game belongs to another player");
        return sid;
    };

    if (is("POST", {"register"})) {
        const auto body = parse_body(r.body);
        RegistrationRequest req;
        req.email = required_string(body, "email");
        req.password = string_field(body, "password").value_or("");
        req.age = small_int(int_field(body, "age"), ErrorCode::InvalidProfile, "age", 0, 150);
        req.languages = string_list(body, "languages").value_or(std::vector<std::string>{});
        req.info_sheet_acknowledged =
            bool_field(body, "info_sheet_acknowledged").value_or(bool_field(body, "info_sheet_ack").value_or(false));
        req.display_name = string_field(body, "display_name");
        auto reg = accounts_->register_account(req);
        json out{{"account", reg.account}};
        if (cfg_.surface_activation_tokens)
            out["activation_token"] = reg.activation_token;
        return ok(out, 201);
    }
    if (is("POST", {"activate"})) {
        const auto body = parse_body(r.body);
        return ok(token_json(accounts_->activate(required_string(body, "token"))));
    }
    if (is("POST", {"login"})) {
        const auto body = parse_body(r.body);
        return ok(token_json(accounts_->login(required_string(body, "email"), required_string(body, "password"))));
    }
    if (is("POST", {"guest"})) {
        (void)parse_body(r.body);
        return ok(token_json(accounts_->guest_session()), 201);
    }
    if (is("GET", {"profile"}))
        return ok(accounts_->profile(principal().player));
    if (is("PUT", {"profile"})) {
        const auto who = principal();
        const auto body = parse_body(r.body);
        ProfileUpdate u;
        if (body.contains("age"))
            u.age = small_int(int_field(body, "age"), ErrorCode::InvalidProfile, "age", 0, 150);
        u.languages = string_list(body, "languages");
        u.privacy = bool_field(body, "privacy");
        if (body.contains("avatar"))
            u.avatar = string_field(body, "avatar");
        u.display_name = string_field(body, "display_name");
        u.info_sheet_acknowledged = bool_field(body, "info_sheet_acknowledged");
        return ok(accounts_->update_profile(who.player, u));
    }
    if (is("POST", {"games"})) {
        const auto who = principal();
        const auto body = parse_body(r.body);
        const auto modality = parse_modality(required_string(body, "modality"));
        const auto mood = int_field(body, "mood_rating");
        if (!mood)
            malformed("'mood_rating' is required");
        const auto rating = small_int(mood, ErrorCode::InvalidMoodRating, "mood rating", 1, 5);
        return ok(engine_->start_game(who.player, modality, *rating), 201);
    }
    if (is("GET", {"games", "*"})) {
        const auto who = principal();
        return ok(engine_->session(owned_session(who, seg[1])));
    }
    if (is("GET", {"games", "*", "snippet"})) {
        const auto who = principal();
        const auto served = engine_->next_snippet(owned_session(who, seg[1]));
        return ok({{"snippet", served.snippet}, {"counted", served.counted}});
    }
    if (is("POST", {"games", "*", "responses"})) {
        const auto who = principal();
        const auto sid = owned_session(who, seg[1]);
        const auto body = parse_body(r.body);
        const auto label = required_string(body, "label");
        SnippetId snippet;
        if (auto id = string_field(body, "snippet_id")) {
            snippet = SnippetId(*id);
        } else {
            const auto s = engine_->session(sid);
            if (!s.pending)
                throw Error(ErrorCode::SnippetNotServed, "no snippet is awaiting an answer in this game");
            snippet = s.pending->snippet;
        }
        const auto res = engine_->submit_response(sid, snippet, label);
        return ok({{"response", res.response},
                   {"breakdown", res.response.breakdown},
                   {"messages", res.messages},
                   {"new_badges", res.new_badges},
                   {"promotions", res.promotions},
                   {"game_score", res.game_score}},
                  201);
    }
    if (is("POST", {"games", "*", "end"})) {
        const auto who = principal();
        return ok(engine_->end_game(owned_session(who, seg[1])));
    }
    if (is("GET", {"leaderboard"})) {
        const auto scope = parse_scope(query_param(r, "modality"));
        const auto limit = parse_limit(query_param(r, "limit"), cfg_.engine.leaderboard_size);
        return ok({{"scope", scope_name(scope)}, {"entries", engine_->leaderboard(scope, limit)}});
    }
    if (is("GET", {"stats", "me"})) {
        const auto who = principal();
        const auto scope = parse_scope(query_param(r, "modality"));
        json out{{"scope", scope_name(scope)}, {"guest", who.guest}};
        if (who.guest) {
            out["stats"] = nullptr;
            out["rank"] = nullptr;
        } else {
            out["stats"] = engine_->stats(who.player, scope);
            const auto rank = engine_->compute_rank(who.player, scope);
            out["rank"] = rank ? json(*rank) : json(nullptr);
        }
        return ok(out);
    }
    if (is("GET", {"badges", "progress"})) {
        const auto who = principal();
        return ok({{"badges", who.guest ? std::vector<BadgeProgress>{} : engine_->badge_progress(who.player)}});
    }
    if (is("GET", {"admin", "annotations", "export"})) {
        require_admin();
        std::ostringstream out;
        export_annotations(*store_, out);
        return {200, nullptr, out.str(), "application/x-ndjson"};
    }
    if (is("GET", {"admin", "report"})) {
        require_admin();
        const auto format = query_param(r, "format").value_or("records");
        const auto stats = stats_report(*store_);
        if (format == "table")
            return {200, nullptr, format_stats_table(stats), "text/plain; charset=utf-8"};
        if (format != "records")
            throw Error(ErrorCode::InvalidArgument, "format must be 'table' or 'records'");
        return ok(stats);
    }
    if (is("GET", {"admin", "reconcile"})) {
        require_admin();
        return ok(reconcile(*store_));
    }
    throw Error(ErrorCode::NotFound, "no such endpoint");
}

void ApiService::mount(httplib::Server& server)
{
    server.set_payload_max_length(cfg_.max_body_bytes);
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params)
            r.query.emplace(k, v);
        r.authorization = req.get_header_value("Authorization");
        r.body = req.body;
        const auto out = handle(r);
        res.status = out.status;
        res.set_content(out.text(), out.content_type);
    };
    const std::string pattern = R"(/api/v1/.*)";
    server.Get(pattern, route);
    server.Post(pattern, route);
    server.Put(pattern, route);
    server.Delete(pattern, route);
    server.Patch(pattern, route);
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        const auto out = error_response(ErrorCode::Internal, "internal error");
        res.status = out.status;
        res.set_content(out.text(), out.content_type);
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty())
            return;
        const auto code = res.status == 404 ? ErrorCode::NotFound
                          : res.status >= 500 ? ErrorCode::Internal
                                              : ErrorCode::MalformedRequest;
        auto out = error_response(code, httplib::status_message(res.status));
        res.set_content(out.text(), out.content_type);
    });
}

bool ApiService::listen()
{
    server_ = std::make_unique<httplib::Server>();
    mount(*server_);
    if (cfg_.port == 0) {
        bound_port_ = server_->bind_to_any_port(cfg_.bind);
        if (bound_port_ < 0)
            return false;
    } else {
        if (!server_->bind_to_port(cfg_.bind, cfg_.port))
            return false;
        bound_port_ = cfg_.port;
    }
    return server_->listen_after_bind();
}

bool ApiService::running() const { return server_ && server_->is_running(); }

void ApiService::stop()
{
    if (server_)
        server_->stop();
}

} // namespace gwap
