#include "gwap/reconcile.hpp"

#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace gwap {

namespace {

struct Recount
{
    std::set<PlayerId> responders;
    std::map<std::string, std::set<PlayerId>> labels;
};

struct StatRecount
{
    Points total_score = 0;
    Points highest_game_score = 0;
    Points highest_word_score = 0;
    std::int64_t games_played = 0;
    std::int64_t snippets_answered = 0;
    std::int64_t scoring_words = 0;
    std::set<std::string> words;
    std::int64_t max_snippets_in_game = 0;
    std::uint64_t last_seq = 0;
};

struct SessionRecount
{
    PlayerId player;
    Modality modality = Modality::text;
    bool guest = false;
    std::int64_t responses = 0;
    Points score = 0;
};

using Key = std::pair<SnippetId, std::string>;

class Checker
{
public:
    explicit Checker(ReconcileReport& report) : report_(report) {}

    template <typename T>
    void compare(const std::string& counter, const T& expected, const T& actual)
    {
        if (expected != actual)
            report_.divergences.push_back({counter, fmt::format("{}", expected), fmt::format("{}", actual)});
    }

    void missing(const std::string& counter, const std::string& expected, const std::string& actual)
    {
        report_.divergences.push_back({counter, expected, actual});
    }

private:
    ReconcileReport& report_;
};

struct Cached
{
    std::array<std::map<SnippetId, SnippetTally>, 3> tallies;
    std::set<Key> promoted;
    std::array<std::map<PlayerId, UserStats>, 4> stats;
    std::map<PlayerId, std::set<std::string>> badges;
};

std::size_t slot(Scope scope) { return scope ? 1 + index_of(*scope) : 0; }

} // namespace

ReconcileReport reconcile(const Store& store)
{
    ReconcileReport report;
    Checker check(report);
    const auto& cfg = store.config();
    const auto events = store.events();
    report.events = events.size();

    const auto cached = store.read([](const State& s) {
        Cached c;
        for (auto m : kAllModalities) {
            const auto& book = s.partition(m).tallies;
            c.tallies[index_of(m)] = book.tallies();
            for (const auto& rec : book.export_validated())
                c.promoted.insert({rec.annotation.snippet_id, rec.annotation.label});
        }
        for (Scope scope : {Scope{}, Scope{Modality::text}, Scope{Modality::audio}, Scope{Modality::video}})
            c.stats[slot(scope)] = s.progression.all_stats(scope);
        for (const auto& [id, acct] : s.accounts)
            for (const auto& [badge, at] : s.progression.badges(id))
                c.badges[id].insert(badge);
        return c;
    });

    std::map<SnippetId, Modality> snippet_modality;
    std::array<std::map<SnippetId, Recount>, 3> tallies;
    std::array<std::map<PlayerId, StatRecount>, 4> stats;
    std::map<SessionId, SessionRecount> sessions;
    std::set<Key> promoted;
    std::set<Key> logged_promotions;
    std::map<PlayerId, std::set<std::string>> badges;

    for (const auto& e : events) {
        const auto& p = e.payload;
        switch (e.kind) {
        case EventKind::snippet_added: {
            const auto id = p.at("snippet").at("id").get<SnippetId>();
            const auto m = p.at("snippet").at("modality").get<Modality>();
            snippet_modality[id] = m;
            tallies[index_of(m)][id];
            break;
        }
        case EventKind::session_start:
            sessions[p.at("session").get<SessionId>()] = {p.at("player").get<PlayerId>(),
                                                         p.at("modality").get<Modality>(), p.at("guest").get<bool>()};
            break;
        case EventKind::response: {
            ++report.responses;
            const auto session_id = p.at("session").get<SessionId>();
            const auto player = p.at("player").get<PlayerId>();
            const auto snippet = p.at("snippet").get<SnippetId>();
            const auto label = p.at("label").get<std::string>();
            const bool counted = p.at("counted").get<bool>();
            const auto& b = p.at("breakdown");
            const Points points = b.at("final").get<Points>();
            const auto modality = snippet_modality.at(snippet);
            auto& t = tallies[index_of(modality)][snippet];
            auto& sess = sessions.at(session_id);
            ++sess.responses;
            sess.score += points;

            const auto p_before = static_cast<std::int64_t>(t.labels[label].size());
            const auto a_before = static_cast<std::int64_t>(t.responders.size());
            if (counted) {
                const auto where = fmt::format("response/{}", e.id);
                check.compare(where + "/p_before", p_before, b.at("p").get<std::int64_t>());
                check.compare(where + "/a_before", a_before, b.at("a").get<std::int64_t>());
                if (!t.responders.contains(player)) {
                    t.responders.insert(player);
                    t.labels[label].insert(player);
                }
                const auto a = static_cast<std::int64_t>(t.responders.size());
                for (const auto& [name, players] : t.labels)
                    if (meets_consensus(static_cast<std::int64_t>(players.size()), a, cfg))
                        promoted.insert({snippet, name});
            }

            if (!sess.guest) {
                for (Scope scope : {Scope{}, Scope{modality}}) {
                    auto& s = stats[slot(scope)][player];
                    s.total_score += points;
                    s.highest_word_score = std::max(s.highest_word_score, points);
                    s.highest_game_score = std::max(s.highest_game_score, sess.score);
                    ++s.snippets_answered;
                    if (counted && p_before > 0)
                        ++s.scoring_words;
                    s.words.insert(label);
                    s.max_snippets_in_game = std::max(s.max_snippets_in_game, sess.responses);
                    s.last_seq = e.id;
                }
            }
            break;
        }
        case EventKind::session_end: {
            const auto& sess = sessions.at(p.at("session").get<SessionId>());
            if (!sess.guest && sess.responses > 0)
                for (Scope scope : {Scope{}, Scope{sess.modality}})
                    ++stats[slot(scope)][sess.player].games_played;
            break;
        }
        case EventKind::promotion:
            logged_promotions.insert({p.at("snippet_id").get<SnippetId>(), p.at("label").get<std::string>()});
            break;
        case EventKind::badge_award:
            badges[p.at("player").get<PlayerId>()].insert(p.at("badge").get<std::string>());
            break;
        default:
            break;
        }
    }

    for (auto m : kAllModalities) {
        const auto& expected = tallies[index_of(m)];
        const auto& actual = cached.tallies[index_of(m)];
        const auto prefix = fmt::format("tally/{}", to_string(m));
        for (const auto& [id, t] : expected) {
            ++report.tallies_checked;
            auto it = actual.find(id);
            if (it == actual.end()) {
                check.missing(fmt::format("{}/{}", prefix, id.str()), "present", "missing");
                continue;
            }
            check.compare(fmt::format("{}/{}/a", prefix, id.str()), static_cast<std::int64_t>(t.responders.size()),
                          it->second.a());
            std::set<std::string> names;
            for (const auto& [label, players] : t.labels)
                if (!players.empty())
                    names.insert(label);
            for (const auto& [label, lt] : it->second.labels)
                names.insert(label);
            for (const auto& label : names) {
                auto el = t.labels.find(label);
                const std::int64_t want = el == t.labels.end() ? 0 : static_cast<std::int64_t>(el->second.size());
                auto al = it->second.labels.find(label);
                const std::int64_t got = al == it->second.labels.end() ? 0 : al->second.p;
                check.compare(fmt::format("{}/{}/{}/p", prefix, id.str(), label), want, got);
                if (al != it->second.labels.end())
                    check.compare(fmt::format("{}/{}/{}/contributors", prefix, id.str(), label), want,
                                  static_cast<std::int64_t>(al->second.contributors.size()));
            }
        }
        for (const auto& [id, t] : actual)
            if (!expected.contains(id))
                check.missing(fmt::format("{}/{}", prefix, id.str()), "missing", "present");
    }

    for (Scope scope : {Scope{}, Scope{Modality::text}, Scope{Modality::audio}, Scope{Modality::video}}) {
        const auto& expected = stats[slot(scope)];
        const auto& actual = cached.stats[slot(scope)];
        const auto prefix = fmt::format("stats/{}", scope_name(scope));
        for (const auto& [player, s] : expected) {
            ++report.stats_checked;
            auto it = actual.find(player);
            const auto base = fmt::format("{}/{}", prefix, player.str());
            if (it == actual.end()) {
                check.missing(base, "present", "missing");
                continue;
            }
            const auto& c = it->second;
            check.compare(base + "/total_score", s.total_score, c.total_score);
            check.compare(base + "/highest_game_score", s.highest_game_score, c.highest_game_score);
            check.compare(base + "/highest_word_score", s.highest_word_score, c.highest_word_score);
            check.compare(base + "/games_played", s.games_played, c.games_played);
            check.compare(base + "/snippets_answered", s.snippets_answered, c.snippets_answered);
            check.compare(base + "/scoring_words", s.scoring_words, c.scoring_words);
            check.compare(base + "/unique_words", static_cast<std::int64_t>(s.words.size()), c.unique_words);
            check.compare(base + "/max_snippets_in_game", s.max_snippets_in_game, c.max_snippets_in_game);
            check.compare(base + "/score_reached_seq", s.last_seq, c.score_reached_seq);
        }
        for (const auto& [player, s] : actual)
            if (!expected.contains(player))
                check.missing(fmt::format("{}/{}", prefix, player.str()), "missing", "present");
    }

    std::set<Key> all = promoted;
    all.insert(cached.promoted.begin(), cached.promoted.end());
    all.insert(logged_promotions.begin(), logged_promotions.end());
    for (const auto& key : all) {
        ++report.promotions_checked;
        const auto path = fmt::format("promotion/{}/{}", key.first.str(), key.second);
        const bool want = promoted.contains(key);
        check.compare(path + "/cached", want, cached.promoted.contains(key));
        check.compare(path + "/logged", want, logged_promotions.contains(key));
    }

    std::set<PlayerId> players;
    for (const auto& [id, b] : badges)
        players.insert(id);
    for (const auto& [id, b] : cached.badges)
        players.insert(id);
    for (const auto& id : players) {
        auto e = badges.find(id);
        auto c = cached.badges.find(id);
        const auto want = e == badges.end() ? std::set<std::string>{} : e->second;
        const auto got = c == cached.badges.end() ? std::set<std::string>{} : c->second;
        if (want != got)
            check.missing(fmt::format("badges/{}", id.str()), fmt::format("{}", fmt::join(want, ",")),
                          fmt::format("{}", fmt::join(got, ",")));
    }
    return report;
}

void to_json(nlohmann::json& j, const Divergence& d)
{
    j = nlohmann::json{{"counter", d.counter}, {"expected", d.expected}, {"actual", d.actual}};
}

void to_json(nlohmann::json& j, const ReconcileReport& r)
{
    j = nlohmann::json{{"events", r.events},
                       {"responses", r.responses},
                       {"tallies_checked", r.tallies_checked},
                       {"stats_checked", r.stats_checked},
                       {"promotions_checked", r.promotions_checked},
                       {"divergences", r.divergences}};
}

} // namespace gwap
