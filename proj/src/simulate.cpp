#include "gwap/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "gwap/accounts.hpp"
#include "gwap/errors.hpp"
#include "gwap/session.hpp"

namespace gwap {

namespace {

constexpr std::string_view kJunkKey = "unique-junk";
constexpr char kPassword[] = "simulated-player";

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidProfile, what); }

double probability(const nlohmann::json& v, const std::string& key)
{
    if (!v.is_number())
        invalid(fmt::format("probability for '{}' must be a number", key));
    return v.get<double>();
}

class Picker
{
public:
    Picker(const SimProfile& profile, std::size_t player)
        : labels_(profile.labels.begin(), profile.labels.end()), player_(player)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(profile.seed), static_cast<std::uint32_t>(profile.seed >> 32),
                          static_cast<std::uint32_t>(player)};
        rng_.seed(seq);
    }

    std::string label()
    {
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
        for (const auto& [label, prob] : labels_) {
            if (u < prob)
                return label;
            u -= prob;
        }
        return fmt::format("junk {} {}", player_, junk_++);
    }

    int mood() { return std::uniform_int_distribution<int>(1, 5)(rng_); }

private:
    std::vector<std::pair<std::string, double>> labels_;
    std::mt19937_64 rng_;
    std::size_t player_;
    std::size_t junk_ = 0;
};

} // namespace

void validate_profile(const SimProfile& profile)
{
    if (profile.players < 1)
        invalid("players must be at least 1");
    if (profile.games_per_player < 1)
        invalid("games per player must be at least 1");
    if (profile.snippets_per_game < 1)
        invalid("snippets per game must be at least 1");
    double sum = profile.unique_junk;
    if (!std::isfinite(profile.unique_junk) || profile.unique_junk < 0)
        invalid("unique junk probability must be a non-negative number");
    for (const auto& [label, prob] : profile.labels) {
        if (!std::isfinite(prob) || prob < 0)
            invalid(fmt::format("probability for '{}' must be a non-negative number", label));
        try {
            if (normalize_label(label) != label)
                invalid(fmt::format("label '{}' is not in normalized form", label));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidProfile)
                throw;
            invalid(fmt::format("label '{}' is not usable: {}", label, e.what()));
        }
        sum += prob;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        invalid(fmt::format("probabilities sum to {}, expected 1", sum));
}

void load_distribution(const nlohmann::json& j, SimProfile& profile)
{
    if (!j.is_object())
        throw Error(ErrorCode::ParseError, "distribution must be a JSON object");
    profile.labels.clear();
    profile.unique_junk = 0.0;
    if (j.contains("labels")) {
        if (!j["labels"].is_object())
            throw Error(ErrorCode::ParseError, "\"labels\" must be an object");
        for (const auto& [k, v] : j["labels"].items())
            profile.labels[k] = probability(v, k);
        for (const auto& [k, v] : j.items()) {
            if (k == "unique_junk")
                profile.unique_junk = probability(v, k);
            else if (k != "labels")
                throw Error(ErrorCode::ParseError, fmt::format("unknown key '{}'", k));
        }
    } else {
        for (const auto& [k, v] : j.items()) {
            if (k == kJunkKey || k == "unique_junk")
                profile.unique_junk = probability(v, k);
            else
                profile.labels[k] = probability(v, k);
        }
    }
}

void load_distribution_file(const std::string& path, SimProfile& profile)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::NotFound, fmt::format("cannot open distribution file '{}'", path));
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorCode::ParseError, fmt::format("'{}' is not valid JSON", path));
    load_distribution(j, profile);
}

SimSummary simulate(Store& store, const SimProfile& profile)
{
    validate_profile(profile);
    const bool has_snippets = store.read([&](const State& s) {
        return std::any_of(s.partition(profile.modality).order.begin(), s.partition(profile.modality).order.end(),
                           [&](const SnippetId& id) { return s.snippets.at(id).active; });
    });
    if (!has_snippets)
        throw Error(ErrorCode::EmptyCorpus, fmt::format("no active {} snippets to play", to_string(profile.modality)));

    SeededSecretSource secrets(profile.seed);
    AccountService accounts(store, secrets, {.password_strength = PasswordStrength::minimal});
    SessionEngine engine(store, profile.seed);
    const auto first_event = store.last_event_id();
    const auto batch = store.read([](const State& s) { return s.player_seq; });

    std::vector<PlayerId> players;
    std::vector<Picker> pickers;
    for (std::int64_t i = 0; i < profile.players; ++i) {
        const auto reg = accounts.register_account(
            {fmt::format("sim{}-{}@example.org", batch, i), kPassword, std::nullopt, {"en"}, true, std::nullopt});
        accounts.activate(reg.activation_token);
        players.push_back(reg.account.id);
        pickers.emplace_back(profile, static_cast<std::size_t>(i));
    }

    SimSummary summary;
    summary.players = profile.players;
    for (std::int64_t g = 0; g < profile.games_per_player; ++g) {
        for (std::size_t i = 0; i < players.size(); ++i) {
            auto& pick = pickers[i];
            const auto game = engine.start_game(players[i], profile.modality, pick.mood());
            for (std::int64_t k = 0; k < profile.snippets_per_game; ++k) {
                const auto served = engine.next_snippet(game.id);
                const auto result = engine.submit_response(game.id, served.snippet.id, pick.label());
                ++summary.responses;
                if (result.response.counted)
                    ++summary.counted_responses;
            }
            const auto end = engine.end_game(game.id);
            summary.max_game_score = std::max(summary.max_game_score, end.game_score);
            ++summary.games;
        }
    }

    std::set<SnippetId> promoted_snippets;
    for (const auto& e : store.events()) {
        if (e.id <= first_event)
            continue;
        if (e.kind == EventKind::promotion) {
            ++summary.promotions;
            ++summary.promotions_by_label[e.payload.at("label").get<std::string>()];
            promoted_snippets.insert(e.payload.at("snippet_id").get<SnippetId>());
        } else if (e.kind == EventKind::badge_award) {
            ++summary.badges_awarded;
        }
    }
    summary.snippets_with_promotion = static_cast<std::int64_t>(promoted_snippets.size());

    std::vector<Points> totals;
    store.read([&](const State& s) {
        for (const auto& id : players) {
            const auto* st = s.progression.stats(id, Scope{profile.modality});
            totals.push_back(st ? st->total_score : 0);
        }
    });
    std::sort(totals.begin(), totals.end());
    summary.min_total_score = totals.front();
    summary.max_total_score = totals.back();
    summary.median_total_score = totals[totals.size() / 2];
    double sum = 0;
    for (auto t : totals)
        sum += static_cast<double>(t);
    summary.mean_total_score = sum / static_cast<double>(totals.size());
    return summary;
}

void to_json(nlohmann::json& j, const SimSummary& s)
{
    j = nlohmann::json{{"players", s.players},
                       {"games", s.games},
                       {"responses", s.responses},
                       {"counted_responses", s.counted_responses},
                       {"promotions", s.promotions},
                       {"promotions_by_label", s.promotions_by_label},
                       {"snippets_with_promotion", s.snippets_with_promotion},
                       {"badges_awarded", s.badges_awarded},
                       {"total_score",
                        {{"min", s.min_total_score},
                         {"max", s.max_total_score},
                         {"mean", s.mean_total_score},
                         {"median", s.median_total_score}}},
                       {"max_game_score", s.max_game_score}};
}

} // namespace gwap
