#include "gwap/accounts.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include <fmt/format.h>
#include <sodium.h>

#include "gwap/errors.hpp"

namespace gwap {

namespace {

constexpr std::size_t kTokenBytes = 32;
constexpr std::size_t kSaltBytes = crypto_pwhash_SALTBYTES;
constexpr std::size_t kHashBytes = 32;
constexpr std::size_t kMinPasswordLength = 8;
constexpr std::size_t kMaxPasswordLength = 1024;
constexpr int kMaxAge = 150;
constexpr std::size_t kMaxLanguageTag = 35;
constexpr std::size_t kMaxDisplayName = 64;
constexpr std::size_t kMaxAvatar = 2048;

std::string to_hex(std::span<const unsigned char> bytes)
{
    std::string out(bytes.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
    out.pop_back();
    return out;
}

std::vector<unsigned char> from_hex(std::string_view hex)
{
    std::vector<unsigned char> out(hex.size() / 2);
    std::size_t len = 0;
    if (hex.size() % 2 != 0 ||
        sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &len, nullptr) != 0 ||
        len != out.size())
        return {};
    return out;
}

std::vector<unsigned char> derive(std::string_view password, std::span<const unsigned char> salt,
                                  unsigned long long ops, std::size_t mem)
{
    std::vector<unsigned char> out(kHashBytes);
    if (crypto_pwhash(out.data(), out.size(), password.data(), password.size(), salt.data(), ops, mem,
                      crypto_pwhash_ALG_ARGON2ID13) != 0)
        throw Error(ErrorCode::Internal, "password hashing ran out of memory");
    return out;
}

void ensure_sodium()
{
    static const bool ready = sodium_init() >= 0;
    if (!ready)
        throw Error(ErrorCode::Internal, "libsodium failed to initialise");
}

std::string trim(std::string_view s)
{
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

void check_age(const std::optional<int>& age)
{
    if (age && (*age < 0 || *age > kMaxAge))
        throw Error(ErrorCode::InvalidProfile, fmt::format("age must be between 0 and {}", kMaxAge));
}

void check_languages(const std::vector<std::string>& languages)
{
    for (const auto& tag : languages) {
        if (tag.empty() || tag.size() > kMaxLanguageTag ||
            !std::all_of(tag.begin(), tag.end(), [](unsigned char c) { return std::isalnum(c) || c == '-'; }))
            throw Error(ErrorCode::InvalidProfile, fmt::format("invalid language tag '{}'", sanitize_utf8(tag)));
    }
}

std::string check_display_name(std::string_view name)
{
    auto clean = trim(sanitize_utf8(name));
    if (clean.empty() || utf8_length(clean) > kMaxDisplayName)
        throw Error(ErrorCode::InvalidProfile, fmt::format("display name must be 1 to {} characters", kMaxDisplayName));
    return clean;
}

void check_avatar(const std::optional<std::string>& avatar)
{
    if (avatar && (avatar->empty() || avatar->size() > kMaxAvatar))
        throw Error(ErrorCode::InvalidProfile, "invalid avatar reference");
}

} // namespace

std::string SecretSource::hex(std::size_t bytes)
{
    std::vector<unsigned char> buf(bytes);
    fill(buf);
    return to_hex(buf);
}

SystemSecretSource::SystemSecretSource() { ensure_sodium(); }

void SystemSecretSource::fill(std::span<unsigned char> out) { randombytes_buf(out.data(), out.size()); }

void SeededSecretSource::fill(std::span<unsigned char> out)
{
    std::lock_guard lock(mutex_);
    for (auto& b : out)
        b = static_cast<unsigned char>(rng_() & 0xFFU);
}

void OutboxMailTransport::send_activation(const PlayerAccount& account, const std::string& token)
{
    std::lock_guard lock(mutex_);
    outbox_.push_back({account.email.value_or(""), token});
}

std::vector<OutboxMailTransport::Message> OutboxMailTransport::messages() const
{
    std::lock_guard lock(mutex_);
    return outbox_;
}

bool valid_email(std::string_view email)
{
    if (email.size() < 3 || email.size() > 254)
        return false;
    const auto at = email.find('@');
    if (at == std::string_view::npos || at == 0 || email.find('@', at + 1) != std::string_view::npos)
        return false;
    const auto local = email.substr(0, at);
    const auto domain = email.substr(at + 1);
    if (local.size() > 64 || domain.empty())
        return false;
    for (unsigned char c : email) {
        if (c <= 0x20 || c >= 0x7F || c == '(' || c == ')' || c == ',' || c == ';' || c == ':' || c == '<' ||
            c == '>' || c == '[' || c == ']' || c == '\\' || c == '"')
            return false;
    }
    const auto dot = domain.find('.');
    if (dot == std::string_view::npos || domain.front() == '.' || domain.back() == '.' ||
        domain.find("..") != std::string_view::npos)
        return false;
    return true;
}

std::string canonical_email(std::string_view email)
{
    auto out = trim(email);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string hash_token(std::string_view token)
{
    ensure_sodium();
    std::array<unsigned char, crypto_generichash_BYTES> digest{};
    crypto_generichash(digest.data(), digest.size(), reinterpret_cast<const unsigned char*>(token.data()),
                       token.size(), nullptr, 0);
    return to_hex(digest);
}

bool verify_password(std::string_view password, std::string_view encoded)
{
    // argon2id$<ops>$<mem>$<salt hex>$<hash hex>
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = encoded.find('$', start);
        parts.push_back(encoded.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    if (parts.size() != 5 || parts[0] != "argon2id")
        return false;
    unsigned long long ops = 0;
    std::size_t mem = 0;
    if (std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), ops).ec != std::errc{} ||
        std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), mem).ec != std::errc{})
        return false;
    const auto salt = from_hex(parts[3]);
    const auto expected = from_hex(parts[4]);
    if (salt.size() != kSaltBytes || expected.size() != kHashBytes)
        return false;
    ensure_sodium();
    const auto actual = derive(password, salt, ops, mem);
    return sodium_memcmp(actual.data(), expected.data(), kHashBytes) == 0;
}

AccountService::AccountService(Store& store, SecretSource& secrets, AccountOptions options)
    : store_(store), secrets_(secrets), options_(options)
{
    ensure_sodium();
}

std::string AccountService::hash_password(std::string_view password)
{
    const bool minimal = options_.password_strength == PasswordStrength::minimal;
    const unsigned long long ops = minimal ? crypto_pwhash_OPSLIMIT_MIN : crypto_pwhash_OPSLIMIT_INTERACTIVE;
    const std::size_t mem = minimal ? crypto_pwhash_MEMLIMIT_MIN : crypto_pwhash_MEMLIMIT_INTERACTIVE;
    std::array<unsigned char, kSaltBytes> salt{};
    secrets_.fill(salt);
    const auto hash = derive(password, salt, ops, mem);
    return fmt::format("argon2id${}${}${}${}", ops, mem, to_hex(salt), to_hex(hash));
}

Registration AccountService::register_account(const RegistrationRequest& request)
{
    const auto email = canonical_email(request.email);
    if (!valid_email(email))
        throw Error(ErrorCode::InvalidEmail, "email address is not valid");
    if (!request.info_sheet_acknowledged)
        throw Error(ErrorCode::InfoSheetNotAcknowledged, "the study information sheet must be acknowledged");
    if (request.password.size() < kMinPasswordLength || request.password.size() > kMaxPasswordLength)
        throw Error(ErrorCode::WeakPassword,
                    fmt::format("password must be {} to {} bytes", kMinPasswordLength, kMaxPasswordLength));
    check_age(request.age);
    check_languages(request.languages);
    std::optional<std::string> display;
    if (request.display_name)
        display = check_display_name(*request.display_name);

    if (store_.read([&](const State& s) { return s.email_index.contains(email); }))
        throw Error(ErrorCode::EmailInUse, "email address is already registered");

    const auto password_hash = hash_password(request.password);
    const auto activation_token = secrets_.hex(kTokenBytes);

    auto account = store_.transact([&](Txn& txn) {
        const auto& state = txn.state();
        if (state.email_index.contains(email))
            throw Error(ErrorCode::EmailInUse, "email address is already registered");
        PlayerAccount acct;
        acct.id = PlayerId(fmt::format("u{:06}", state.player_seq + 1));
        acct.email = email;
        acct.display_name = display.value_or(fmt::format("Player {}", state.player_seq + 1));
        acct.age = request.age;
        acct.languages = request.languages;
        acct.info_sheet_acknowledged = true;
        const auto now = txn.now();
        txn.emit(EventKind::account_created,
                 {{"account", acct},
                  {"password_hash", password_hash},
                  {"activation",
                   {{"token_hash", hash_token(activation_token)}, {"expires_at", now + options_.activation_ttl_ms}}}});
        return acct;
    });

    if (mail_)
        mail_->send_activation(account, activation_token);
    return {std::move(account), activation_token};
}

AuthToken AccountService::issue_token(Txn& txn, const PlayerId& player, bool guest)
{
    AuthToken t{secrets_.hex(kTokenBytes), player, txn.now() + options_.token_ttl_ms, guest};
    txn.emit(EventKind::token_issued,
             {{"token_hash", hash_token(t.token)}, {"player", player}, {"expires_at", t.expires_at}, {"guest", guest}});
    return t;
}

AuthToken AccountService::activate(std::string_view activation_token)
{
    const auto key = hash_token(activation_token);
    return store_.transact([&](Txn& txn) {
        const auto& state = txn.state();
        auto it = state.activations.find(key);
        if (it == state.activations.end() || it->second.expires_at <= txn.now())
            throw Error(ErrorCode::TokenInvalid, "activation token is invalid or expired");
        const auto player = it->second.player;
        txn.emit(EventKind::account_activated, {{"player", player}, {"token_hash", key}});
        return issue_token(txn, player, false);
    });
}

AuthToken AccountService::login(std::string_view email, std::string_view password)
{
    const auto canonical = canonical_email(email);
    auto found = store_.read([&](const State& s) -> std::optional<std::pair<PlayerId, std::string>> {
        auto it = s.email_index.find(canonical);
        if (it == s.email_index.end())
            return std::nullopt;
        auto hash = s.password_hashes.find(it->second);
        if (hash == s.password_hashes.end())
            return std::nullopt;
        return std::pair{it->second, hash->second};
    });
    if (!found || !verify_password(password, found->second))
        throw Error(ErrorCode::InvalidCredentials, "email or password is incorrect");

    return store_.transact([&](Txn& txn) {
        if (!txn.state().account(found->first).activated)
            throw Error(ErrorCode::NotActivated, "account has not been activated");
        return issue_token(txn, found->first, false);
    });
}

AuthToken AccountService::guest_session()
{
    return store_.transact([&](Txn& txn) {
        PlayerAccount acct;
        acct.id = PlayerId(fmt::format("u{:06}", txn.state().player_seq + 1));
        acct.display_name = "Guest";
        acct.guest = true;
        txn.emit(EventKind::account_created, {{"account", acct}});
        return issue_token(txn, acct.id, true);
    });
}

std::optional<Principal> AccountService::authenticate(std::string_view token) const
{
    if (token.empty() || token.size() > 256)
        return std::nullopt;
    const auto key = hash_token(token);
    const auto now = store_.clock().now();
    return store_.read([&](const State& s) -> std::optional<Principal> {
        auto it = s.tokens.find(key);
        if (it == s.tokens.end() || it->second.expires_at <= now)
            return std::nullopt;
        return Principal{it->second.player, it->second.guest};
    });
}

PlayerAccount AccountService::profile(const PlayerId& player) const
{
    return store_.read([&](const State& s) { return s.account(player); });
}

PlayerAccount AccountService::update_profile(const PlayerId& player, const ProfileUpdate& update)
{
    if (update.age)
        check_age(*update.age);
    if (update.languages)
        check_languages(*update.languages);
    if (update.avatar)
        check_avatar(*update.avatar);
    std::optional<std::string> display;
    if (update.display_name)
        display = check_display_name(*update.display_name);

    return store_.transact([&](Txn& txn) {
        auto acct = txn.state().account(player);
        if (acct.guest)
            throw Error(ErrorCode::Forbidden, "guest accounts have no editable profile");
        if (update.age)
            acct.age = *update.age;
        if (update.languages)
            acct.languages = *update.languages;
        if (update.privacy)
            acct.privacy = *update.privacy;
        if (update.avatar)
            acct.avatar = *update.avatar;
        if (display)
            acct.display_name = *display;
        if (update.info_sheet_acknowledged)
            acct.info_sheet_acknowledged = acct.info_sheet_acknowledged || *update.info_sheet_acknowledged;
        txn.emit(EventKind::profile_updated, {{"account", acct}});
        return acct;
    });
}

} // namespace gwap
