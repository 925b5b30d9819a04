#include "gwap/consensus.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "gwap/clock.hpp"
#include "gwap/errors.hpp"

namespace gwap {

bool meets_consensus(std::int64_t p, std::int64_t a, const EngineConfig& cfg) noexcept
{
    if (a <= 0 || a < cfg.min_responders_for_promotion)
        return false;
    return static_cast<double>(p) / static_cast<double>(a) >= cfg.consensus_threshold;
}

void TallyBook::add_snippet(const SnippetId& id, bool active)
{
    auto& t = tallies_[id];
    t.snippet_id = id;
    t.active = active;
}

void TallyBook::set_active(const SnippetId& id, bool active)
{
    auto it = tallies_.find(id);
    if (it == tallies_.end())
        throw Error(ErrorCode::UnknownSnippet, fmt::format("unknown snippet '{}'", id.str()));
    it->second.active = active;
}

bool TallyBook::contains(const SnippetId& id) const { return tallies_.contains(id); }

const SnippetTally& TallyBook::require(const SnippetId& snippet) const
{
    auto it = tallies_.find(snippet);
    if (it == tallies_.end())
        throw Error(ErrorCode::UnknownSnippet, fmt::format("unknown snippet '{}'", snippet.str()));
    return it->second;
}

TallyCounts TallyBook::record_response(const PlayerId& player, const SnippetId& snippet, const std::string& label,
                                       std::string_view raw_label, bool counted)
{
    require(snippet);
    auto& tally = tallies_.at(snippet);
    if (!tally.active)
        throw Error(ErrorCode::InactiveSnippet, fmt::format("snippet '{}' is inactive", snippet.str()));

    TallyCounts before{0, tally.a()};
    if (auto it = tally.labels.find(label); it != tally.labels.end())
        before.p = it->second.p;

    if (!counted || tally.responders.contains(player))
        return before;

    tally.responders.insert(player);
    auto& lt = tally.labels[label];
    if (lt.label.empty()) {
        lt.snippet_id = snippet;
        lt.label = label;
    }
    if (lt.contributors.insert(player).second) {
        ++lt.p;
        ++lt.raw_forms[std::string(raw_label)];
    }
    return before;
}

TallyCounts TallyBook::counts(const SnippetId& snippet, const std::string& label) const
{
    const auto& tally = require(snippet);
    TallyCounts c{0, tally.a()};
    if (auto it = tally.labels.find(label); it != tally.labels.end())
        c.p = it->second.p;
    return c;
}

bool TallyBook::has_responded(const PlayerId& player, const SnippetId& snippet) const
{
    return require(snippet).responders.contains(player);
}

double TallyBook::popularity_share(const SnippetId& snippet, const std::string& label) const
{
    const auto c = counts(snippet, label);
    if (c.a == 0)
        return 0.0;
    return static_cast<double>(c.p) / static_cast<double>(c.a);
}

std::vector<ValidatedAnnotation> TallyBook::promotion_candidates(const SnippetId& snippet, const EngineConfig& cfg,
                                                                 Timestamp now) const
{
    const auto& tally = require(snippet);
    std::vector<ValidatedAnnotation> out;
    const auto a = tally.a();
    for (const auto& [label, lt] : tally.labels) {
        if (is_promoted(snippet, label) || !meets_consensus(lt.p, a, cfg))
            continue;
        out.push_back({snippet, label, static_cast<double>(lt.p) / static_cast<double>(a), a, now});
    }
    return out;
}

std::vector<ValidatedAnnotation> TallyBook::evaluate_promotions(const SnippetId& snippet, const EngineConfig& cfg,
                                                                Timestamp now)
{
    auto fresh = promotion_candidates(snippet, cfg, now);
    for (const auto& v : fresh)
        promote(v);
    return fresh;
}

void TallyBook::promote(const ValidatedAnnotation& annotation)
{
    require(annotation.snippet_id);
    promoted_[annotation.snippet_id].try_emplace(annotation.label, annotation);
}

bool TallyBook::is_promoted(const SnippetId& snippet, const std::string& label) const
{
    auto it = promoted_.find(snippet);
    return it != promoted_.end() && it->second.contains(label);
}

std::size_t TallyBook::promoted_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& [_, labels] : promoted_)
        n += labels.size();
    return n;
}

std::vector<ExportRecord> TallyBook::export_validated() const
{
    std::vector<ExportRecord> out;
    for (const auto& [snippet, labels] : promoted_) {
        const auto first = out.size();
        const auto& tally = tallies_.at(snippet);
        for (const auto& [label, annotation] : labels) {
            ExportRecord rec{annotation, label};
            if (auto it = tally.labels.find(label); it != tally.labels.end() && !it->second.raw_forms.empty()) {
                // Most frequent raw spelling; map order breaks ties lexicographically.
                auto best = it->second.raw_forms.begin();
                for (auto r = best; r != it->second.raw_forms.end(); ++r)
                    if (r->second > best->second)
                        best = r;
                rec.raw_label_most_common = best->first;
            }
            out.push_back(std::move(rec));
        }
        std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
                         [](const ExportRecord& x, const ExportRecord& y) {
                             return x.annotation.share > y.annotation.share;
                         });
    }
    return out;
}

const SnippetTally* TallyBook::find(const SnippetId& snippet) const
{
    auto it = tallies_.find(snippet);
    return it == tallies_.end() ? nullptr : &it->second;
}

SnippetTally* TallyBook::mutable_tally(const SnippetId& snippet)
{
    auto it = tallies_.find(snippet);
    return it == tallies_.end() ? nullptr : &it->second;
}

nlohmann::json TallyBook::snapshot() const
{
    auto snippets = nlohmann::json::object();
    for (const auto& [id, t] : tallies_) {
        auto labels = nlohmann::json::object();
        for (const auto& [label, lt] : t.labels) {
            labels[label] = {{"p", lt.p}, {"contributors", lt.contributors}, {"raw_forms", lt.raw_forms}};
        }
        snippets[id.str()] = {{"a", t.a()}, {"active", t.active}, {"responders", t.responders}, {"labels", labels}};
    }
    auto promoted = nlohmann::json::array();
    for (const auto& [_, labels] : promoted_)
        for (const auto& [__, v] : labels)
            promoted.push_back(v);
    return {{"snippets", snippets}, {"promoted", promoted}};
}

std::string format_export_line(const ExportRecord& record)
{
    const auto& v = record.annotation;
    return fmt::format(R"({{"snippet_id":{},"label":{},"raw_label_most_common":{},"share":{:.6f},"responders":{},"promoted_at":{}}})",
                       nlohmann::json(v.snippet_id.str()).dump(), nlohmann::json(v.label).dump(),
                       nlohmann::json(record.raw_label_most_common).dump(), v.share, v.responders,
                       nlohmann::json(format_utc(v.promoted_at)).dump());
}

void to_json(nlohmann::json& j, const ValidatedAnnotation& v)
{
    j = nlohmann::json{{"snippet_id", v.snippet_id},
                       {"label", v.label},
                       {"share", v.share},
                       {"responders", v.responders},
                       {"promoted_at", v.promoted_at}};
}

void from_json(const nlohmann::json& j, ValidatedAnnotation& v)
{
    v.snippet_id = j.at("snippet_id").get<SnippetId>();
    v.label = j.at("label").get<std::string>();
    v.share = j.at("share").get<double>();
    v.responders = j.at("responders").get<std::int64_t>();
    v.promoted_at = j.at("promoted_at").get<Timestamp>();
}

} // namespace gwap
