#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwap/domain.hpp"

namespace gwap {

struct LabelTally
{
    SnippetId snippet_id;
    std::string label;
    std::int64_t p = 0;
    std::set<PlayerId> contributors;
    // Raw spellings that normalized to this label, for export fidelity.
    std::map<std::string, std::int64_t> raw_forms;
};

struct SnippetTally
{
    SnippetId snippet_id;
    bool active = true;
    std::set<PlayerId> responders;
    std::map<std::string, LabelTally> labels;

    [[nodiscard]] std::int64_t a() const noexcept { return static_cast<std::int64_t>(responders.size()); }
};

struct TallyCounts
{
    std::int64_t p = 0;
    std::int64_t a = 0;

    friend bool operator==(const TallyCounts&, const TallyCounts&) = default;
};

struct ValidatedAnnotation
{
    SnippetId snippet_id;
    std::string label;
    double share = 0.0;
    std::int64_t responders = 0;
    Timestamp promoted_at = 0;

    friend bool operator==(const ValidatedAnnotation&, const ValidatedAnnotation&) = default;
};

struct ExportRecord
{
    ValidatedAnnotation annotation;
    std::string raw_label_most_common;
};

/// Popularity counters for every snippet of one modality, plus the labels
/// that have been promoted to validated annotations.
///
/// p counts distinct players per (snippet, label); a counts distinct players
/// per snippet. A player's first counted response on a snippet is the only
/// one that ever reaches the counters, so the label counts of a snippet
/// always sum to a.
class TallyBook
{
public:
    void add_snippet(const SnippetId& id, bool active = true);
    void set_active(const SnippetId& id, bool active);
    [[nodiscard]] bool contains(const SnippetId& id) const;

    /// Returns the counts as they stood before this response. Uncounted
    /// responses, and counted ones from a player already on the snippet,
    /// leave the tallies untouched.
    /// Throws UnknownSnippet / InactiveSnippet.
    TallyCounts record_response(const PlayerId& player, const SnippetId& snippet, const std::string& label,
                                std::string_view raw_label, bool counted);

    /// Current (p, a) for a label. Throws UnknownSnippet.
    [[nodiscard]] TallyCounts counts(const SnippetId& snippet, const std::string& label) const;

    [[nodiscard]] bool has_responded(const PlayerId& player, const SnippetId& snippet) const;

    /// p / a, or 0 when nobody has responded. Throws UnknownSnippet.
    [[nodiscard]] double popularity_share(const SnippetId& snippet, const std::string& label) const;

    /// Labels that meet the threshold and responder minimum now and are not
    /// yet promoted. Does not modify the book.
    [[nodiscard]] std::vector<ValidatedAnnotation> promotion_candidates(const SnippetId& snippet,
                                                                        const EngineConfig& cfg,
                                                                        Timestamp now) const;

    /// promotion_candidates followed by promote() on each; returns the
    /// newly promoted set.
    std::vector<ValidatedAnnotation> evaluate_promotions(const SnippetId& snippet, const EngineConfig& cfg,
                                                         Timestamp now);

    /// Records a promotion. Promotions are permanent; repeating one is a no-op.
    void promote(const ValidatedAnnotation& annotation);

    [[nodiscard]] bool is_promoted(const SnippetId& snippet, const std::string& label) const;

    /// All promoted annotations ordered by snippet id, then descending share.
    [[nodiscard]] std::vector<ExportRecord> export_validated() const;

    [[nodiscard]] std::size_t promoted_count() const noexcept;

    [[nodiscard]] const SnippetTally* find(const SnippetId& snippet) const;
    [[nodiscard]] const std::map<SnippetId, SnippetTally>& tallies() const noexcept { return tallies_; }

    /// Canonical dump of every counter, for byte comparisons.
    [[nodiscard]] nlohmann::json snapshot() const;

    /// Direct access for fault-injection tests.
    SnippetTally* mutable_tally(const SnippetId& snippet);

private:
    const SnippetTally& require(const SnippetId& snippet) const;

    std::map<SnippetId, SnippetTally> tallies_;
    std::map<SnippetId, std::map<std::string, ValidatedAnnotation>> promoted_;
};

[[nodiscard]] bool meets_consensus(std::int64_t p, std::int64_t a, const EngineConfig& cfg) noexcept;

/// One line-delimited JSON record, share fixed to 6 decimal places.
[[nodiscard]] std::string format_export_line(const ExportRecord& record);

void to_json(nlohmann::json& j, const ValidatedAnnotation& v);
void from_json(const nlohmann::json& j, ValidatedAnnotation& v);

} // namespace gwap
