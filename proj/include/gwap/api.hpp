#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "gwap/accounts.hpp"
#include "gwap/clock.hpp"
#include "gwap/domain.hpp"
#include "gwap/errors.hpp"
#include "gwap/event_log.hpp"
#include "gwap/session.hpp"
#include "gwap/store.hpp"

namespace httplib {
class Server;
}

namespace gwap {

struct ServiceConfig
{
    std::string bind = "127.0.0.1";
    int port = 8080;
    // Empty keeps the event log in memory.
    std::string store_path;
    // Bearer credential for /admin routes. Empty disables them.
    std::string admin_token;
    EngineConfig engine;
    bool test_mode = false;
    // Only honoured in test mode.
    std::optional<std::uint64_t> rng_seed;
    AccountOptions accounts;
    bool surface_activation_tokens = true;
    std::size_t max_body_bytes = 64 * 1024;
};

/// Recognised keys: bind, port, store_path, admin_token, engine (object of
/// EngineConfig overrides), test_mode, rng_seed, token_ttl_hours,
/// activation_ttl_hours, password_strength ("interactive" or "minimal"),
/// surface_activation_tokens, max_body_bytes.
/// Throws ConfigOutOfRange, ParseError.
[[nodiscard]] ServiceConfig parse_service_config(const nlohmann::json& j);
[[nodiscard]] ServiceConfig load_service_config(const std::string& path);

struct ApiRequest
{
    std::string method;
    std::string path;
    std::multimap<std::string, std::string> query;
    std::string authorization;
    std::string body;
};

struct ApiResponse
{
    int status = 200;
    nlohmann::json body;
    // Set for non-JSON payloads such as the line-delimited export.
    std::optional<std::string> raw;
    std::string content_type = "application/json";

    [[nodiscard]] std::string text() const;
};

/// The /api/v1 surface. handle() is transport independent; mount() wires it
/// into an HTTP server.
class ApiService
{
public:
    explicit ApiService(ServiceConfig cfg, std::shared_ptr<Clock> clock = nullptr,
                        std::unique_ptr<EventLog> log = nullptr);

    ApiResponse handle(const ApiRequest& request);

    void mount(httplib::Server& server);

    /// Binds and serves until stop() is called. Returns false if the socket
    /// could not be bound.
    bool listen();
    void stop();

    /// Port actually bound; differs from the configured one when it was 0.
    [[nodiscard]] int bound_port() const noexcept { return bound_port_; }
    [[nodiscard]] bool running() const;

    [[nodiscard]] Store& store() noexcept { return *store_; }
    [[nodiscard]] AccountService& accounts() noexcept { return *accounts_; }
    [[nodiscard]] SessionEngine& engine() noexcept { return *engine_; }
    [[nodiscard]] OutboxMailTransport& outbox() noexcept { return *outbox_; }
    [[nodiscard]] const ServiceConfig& config() const noexcept { return cfg_; }

    ~ApiService();

private:
    ApiResponse dispatch(const ApiRequest& request);

    ServiceConfig cfg_;
    std::shared_ptr<Clock> clock_;
    std::unique_ptr<Store> store_;
    std::unique_ptr<SecretSource> secrets_;
    std::unique_ptr<AccountService> accounts_;
    std::unique_ptr<SessionEngine> engine_;
    std::shared_ptr<OutboxMailTransport> outbox_;
    std::unique_ptr<httplib::Server> server_;
    int bound_port_ = 0;
};

/// {"error": {"code": ..., "message": ...}} with the code's HTTP status.
[[nodiscard]] ApiResponse error_response(ErrorCode code, const std::string& message);

} // namespace gwap
