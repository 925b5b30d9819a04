#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gwap/domain.hpp"
#include "gwap/store.hpp"

namespace gwap {

/// Source of token and salt bytes.
class SecretSource
{
public:
    virtual ~SecretSource() = default;
    virtual void fill(std::span<unsigned char> out) = 0;

    [[nodiscard]] std::string hex(std::size_t bytes);
};

class SystemSecretSource final : public SecretSource
{
public:
    SystemSecretSource();
    void fill(std::span<unsigned char> out) override;
};

/// Reproducible bytes for test mode and the simulator. Never use in
/// production: tokens become predictable.
class SeededSecretSource final : public SecretSource
{
public:
    explicit SeededSecretSource(std::uint64_t seed) : rng_(seed) {}
    void fill(std::span<unsigned char> out) override;

private:
    std::mutex mutex_;
    std::mt19937_64 rng_;
};

enum class PasswordStrength { interactive, minimal };

struct AccountOptions
{
    Timestamp token_ttl_ms = 24LL * 3600 * 1000;
    Timestamp activation_ttl_ms = 48LL * 3600 * 1000;
    PasswordStrength password_strength = PasswordStrength::interactive;
};

struct RegistrationRequest
{
    std::string email;
    std::string password;
    std::optional<int> age;
    std::vector<std::string> languages;
    bool info_sheet_acknowledged = false;
    std::optional<std::string> display_name;
};

struct Registration
{
    PlayerAccount account;
    std::string activation_token;
};

struct AuthToken
{
    std::string token;
    PlayerId player;
    Timestamp expires_at = 0;
    bool guest = false;
};

struct Principal
{
    PlayerId player;
    bool guest = false;
};

/// Fields left empty are not changed. For age and avatar an engaged outer
/// optional holding nullopt clears the value.
struct ProfileUpdate
{
    std::optional<std::optional<int>> age;
    std::optional<std::vector<std::string>> languages;
    std::optional<bool> privacy;
    std::optional<std::optional<std::string>> avatar;
    std::optional<std::string> display_name;
    std::optional<bool> info_sheet_acknowledged;
};

/// Delivers activation links. Real mail delivery plugs in here.
class MailTransport
{
public:
    virtual ~MailTransport() = default;
    virtual void send_activation(const PlayerAccount& account, const std::string& token) = 0;
};

/// Keeps every message in memory.
class OutboxMailTransport final : public MailTransport
{
public:
    struct Message
    {
        std::string email;
        std::string token;
    };

    void send_activation(const PlayerAccount& account, const std::string& token) override;
    [[nodiscard]] std::vector<Message> messages() const;

private:
    mutable std::mutex mutex_;
    std::vector<Message> outbox_;
};

class AccountService
{
public:
    AccountService(Store& store, SecretSource& secrets, AccountOptions options = {});

    void set_mail_transport(std::shared_ptr<MailTransport> transport) { mail_ = std::move(transport); }

    /// Throws InvalidEmail, InfoSheetNotAcknowledged, EmailInUse,
    /// WeakPassword, InvalidProfile.
    Registration register_account(const RegistrationRequest& request);

    /// Throws TokenInvalid for unknown, used or expired tokens.
    AuthToken activate(std::string_view activation_token);

    /// Throws InvalidCredentials, NotActivated.
    AuthToken login(std::string_view email, std::string_view password);

    AuthToken guest_session();

    /// nullopt for unknown or expired tokens.
    [[nodiscard]] std::optional<Principal> authenticate(std::string_view token) const;

    [[nodiscard]] PlayerAccount profile(const PlayerId& player) const;

    /// Throws InvalidProfile, Forbidden (guests have no editable profile).
    PlayerAccount update_profile(const PlayerId& player, const ProfileUpdate& update);

private:
    AuthToken issue_token(Txn& txn, const PlayerId& player, bool guest);
    [[nodiscard]] std::string hash_password(std::string_view password);

    Store& store_;
    SecretSource& secrets_;
    AccountOptions options_;
    std::shared_ptr<MailTransport> mail_;
};

[[nodiscard]] bool valid_email(std::string_view email);

/// Lowercased, trimmed form used for uniqueness.
[[nodiscard]] std::string canonical_email(std::string_view email);

/// Hex BLAKE2b digest. Tokens are stored only in this form.
[[nodiscard]] std::string hash_token(std::string_view token);

[[nodiscard]] bool verify_password(std::string_view password, std::string_view encoded);

} // namespace gwap
