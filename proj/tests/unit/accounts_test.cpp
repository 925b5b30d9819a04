#include <doctest.h>

#include <set>

#include "fixtures.hpp"

using namespace gwap;
using gwap::test::throws_code;
using gwap::test::World;

namespace {

RegistrationRequest request(std::string email)
{
    RegistrationRequest r;
    r.email = std::move(email);
    r.password = "long enough";
    r.info_sheet_acknowledged = true;
    return r;
}

} // namespace

TEST_SUITE("accounts")
{
    TEST_CASE("registration creates a pending account")
    {
        World w;
        auto req = request("Ada@Example.org");
        req.age = 36;
        req.languages = {"en", "it"};
        const auto reg = w.accounts.register_account(req);
        CHECK_FALSE(reg.account.activated);
        CHECK_FALSE(reg.account.guest);
        CHECK(reg.account.email == "ada@example.org");
        CHECK(reg.account.age == 36);
        CHECK(reg.account.languages == std::vector<std::string>{"en", "it"});
        CHECK(reg.account.id.str() == "u000001");
        CHECK(reg.account.display_name == "Player 1");
        CHECK(reg.activation_token.size() >= 32);
        CHECK(throws_code([&] { w.engine.start_game(reg.account.id, Modality::text, 3); },
                          ErrorCode::AccountNotActivated));
    }

    TEST_CASE("registration rejections")
    {
        World w;
        (void)w.accounts.register_account(request("a@example.org"));
        CHECK(throws_code([&] { w.accounts.register_account(request("a@example.org")); }, ErrorCode::EmailInUse));
        CHECK(throws_code([&] { w.accounts.register_account(request(" A@EXAMPLE.org ")); }, ErrorCode::EmailInUse));
        auto no_ack = request("b@example.org");
        no_ack.info_sheet_acknowledged = false;
        CHECK(throws_code([&] { w.accounts.register_account(no_ack); }, ErrorCode::InfoSheetNotAcknowledged));
        for (const auto* bad : {"", "plain", "@example.org", "a@", "a b@example.org", "a@example", "a@@example.org"})
            CHECK_MESSAGE(throws_code([&] { w.accounts.register_account(request(bad)); }, ErrorCode::InvalidEmail), bad);
        auto weak = request("c@example.org");
        weak.password = "short";
        CHECK(throws_code([&] { w.accounts.register_account(weak); }, ErrorCode::WeakPassword));
        auto old = request("d@example.org");
        old.age = 151;
        CHECK(throws_code([&] { w.accounts.register_account(old); }, ErrorCode::InvalidProfile));
        auto lang = request("e@example.org");
        lang.languages = {"en us"};
        CHECK(throws_code([&] { w.accounts.register_account(lang); }, ErrorCode::InvalidProfile));
    }

    TEST_CASE("email validation and canonical form")
    {
        CHECK(valid_email("user.name+tag@sub.example.co.uk"));
        CHECK_FALSE(valid_email("user@.example.org"));
        CHECK(canonical_email("  Mixed@Case.ORG ") == "mixed@case.org");
    }

    TEST_CASE("activation, login and the activation gate")
    {
        World w;
        const auto reg = w.accounts.register_account(request("a@example.org"));
        CHECK(throws_code([&] { w.accounts.login("a@example.org", "long enough"); }, ErrorCode::NotActivated));
        CHECK(throws_code([&] { w.accounts.login("a@example.org", "wrong password"); }, ErrorCode::InvalidCredentials));
        CHECK(throws_code([&] { w.accounts.login("nobody@example.org", "long enough"); }, ErrorCode::InvalidCredentials));
        CHECK(throws_code([&] { w.accounts.activate("not-a-token"); }, ErrorCode::TokenInvalid));

        const auto first = w.accounts.activate(reg.activation_token);
        CHECK(first.player == reg.account.id);
        CHECK_FALSE(first.guest);
        CHECK(w.accounts.profile(reg.account.id).activated);
        CHECK(throws_code([&] { w.accounts.activate(reg.activation_token); }, ErrorCode::TokenInvalid));

        const auto login = w.accounts.login("A@example.org", "long enough");
        CHECK(login.player == reg.account.id);
        CHECK(login.token != first.token);
        const auto who = w.accounts.authenticate(login.token);
        REQUIRE(who);
        CHECK(who->player == reg.account.id);
        CHECK_FALSE(who->guest);
        CHECK_NOTHROW(w.engine.start_game(reg.account.id, Modality::text, 3));
    }

    TEST_CASE("expired activation and auth tokens authenticate nothing")
    {
        World w;
        const auto reg = w.accounts.register_account(request("a@example.org"));
        w.clock->advance(AccountOptions{}.activation_ttl_ms + 1);
        CHECK(throws_code([&] { w.accounts.activate(reg.activation_token); }, ErrorCode::TokenInvalid));

        const auto p = w.player();
        const auto token = w.accounts.login("player1@example.org", "correct horse");
        CHECK(w.accounts.authenticate(token.token));
        w.clock->advance(AccountOptions{}.token_ttl_ms);
        CHECK_FALSE(w.accounts.authenticate(token.token));
        (void)p;
    }

    TEST_CASE("guest sessions play immediately")
    {
        World w;
        w.add_snippets(Modality::text, 2);
        const auto t = w.accounts.guest_session();
        CHECK(t.guest);
        const auto who = w.accounts.authenticate(t.token);
        REQUIRE(who);
        CHECK(who->guest);
        const auto acct = w.accounts.profile(t.player);
        CHECK(acct.guest);
        CHECK_FALSE(acct.email);
        CHECK_NOTHROW(w.play(t.player, Modality::text, {"calm"}));
        CHECK(throws_code([&] { w.accounts.update_profile(t.player, {.privacy = true}); }, ErrorCode::Forbidden));
    }

    TEST_CASE("tokens are long, unique and stored only hashed")
    {
        SystemSecretSource system;
        World w;
        AccountService live(*w.store, system, {.password_strength = PasswordStrength::minimal});
        std::set<std::string> seen;
        for (int i = 0; i < 200; ++i) {
            const auto t = live.guest_session();
            CHECK(t.token.size() * 4 >= 128);
            for (char c : t.token)
                CHECK(std::isxdigit(static_cast<unsigned char>(c)));
            CHECK(seen.insert(t.token).second);
        }
        w.store->read([&](const State& s) {
            for (const auto& token : seen) {
                CHECK(s.tokens.count(token) == 0);
                CHECK(s.tokens.count(hash_token(token)) == 1);
            }
            return 0;
        });
        for (const auto& e : w.store->events())
            for (const auto& token : seen)
                CHECK(e.payload.dump().find(token) == std::string::npos);
    }

    TEST_CASE("passwords are salted hashes")
    {
        World w;
        const auto a = w.player();
        const auto b = w.player();
        w.store->read([&](const State& s) {
            const auto& ha = s.password_hashes.at(a);
            const auto& hb = s.password_hashes.at(b);
            CHECK(ha.starts_with("argon2id$"));
            CHECK(ha != hb);
            CHECK(ha.find("correct horse") == std::string::npos);
            CHECK(verify_password("correct horse", ha));
            CHECK_FALSE(verify_password("correct horsf", ha));
            CHECK_FALSE(verify_password("correct horse", "garbage"));
            return 0;
        });
    }

    TEST_CASE("profile updates")
    {
        World w;
        const auto p = w.player();
        auto acct = w.accounts.update_profile(p, {.age = 40, .languages = std::vector<std::string>{"el"}, .privacy = true,
                                                  .avatar = std::optional<std::string>("owl"), .display_name = "Nightingale"});
        CHECK(acct.age == 40);
        CHECK(acct.privacy);
        CHECK(acct.avatar == "owl");
        CHECK(acct.display_name == "Nightingale");
        acct = w.accounts.update_profile(p, {.age = std::optional<int>{}, .avatar = std::optional<std::string>{}});
        CHECK_FALSE(acct.age);
        CHECK_FALSE(acct.avatar);
        CHECK(acct.privacy);
        CHECK(acct.languages == std::vector<std::string>{"el"});
        CHECK(throws_code([&] { w.accounts.update_profile(p, {.display_name = std::string(65, 'x')}); },
                          ErrorCode::InvalidProfile));
        CHECK(nlohmann::json(w.accounts.profile(p)) == nlohmann::json(acct));
        CHECK(throws_code([&] { (void)w.accounts.profile(PlayerId("u999999")); }, ErrorCode::UnknownPlayer));
    }

    TEST_CASE("activation mail goes through the transport")
    {
        World w;
        auto outbox = std::make_shared<OutboxMailTransport>();
        w.accounts.set_mail_transport(outbox);
        const auto reg = w.accounts.register_account(request("mail@example.org"));
        const auto sent = outbox->messages();
        REQUIRE(sent.size() == 1);
        CHECK(sent[0].email == "mail@example.org");
        CHECK(sent[0].token == reg.activation_token);
    }
}
