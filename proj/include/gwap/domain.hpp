#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwap/ids.hpp"

namespace gwap {

using Points = std::int64_t;

/// Milliseconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

enum class Modality { text, audio, video };

inline constexpr std::array<Modality, 3> kAllModalities{Modality::text, Modality::audio, Modality::video};

[[nodiscard]] std::string_view to_string(Modality m) noexcept;

/// Parses "text", "audio" or "video". Throws Error(InvalidModality).
[[nodiscard]] Modality parse_modality(std::string_view s);

[[nodiscard]] constexpr std::size_t index_of(Modality m) noexcept { return static_cast<std::size_t>(m); }

struct Snippet
{
    SnippetId id;
    Modality modality = Modality::text;
    // Text body for text snippets, media reference for audio and video.
    std::string payload;
    std::optional<std::string> title;
    std::optional<std::string> source;
    bool active = true;
};

/// Throws Error(WrongModalityPayload) if the payload does not fit the modality.
void check_snippet(const Snippet& s);

struct PlayerAccount
{
    PlayerId id;
    std::optional<std::string> email;
    std::string display_name;
    bool activated = false;
    bool guest = false;
    std::optional<int> age;
    std::vector<std::string> languages;
    bool privacy = false;
    std::optional<std::string> avatar;
    bool info_sheet_acknowledged = false;

    [[nodiscard]] bool can_play() const noexcept { return guest || activated; }
};

struct EngineConfig
{
    Points base_points = 100;
    Points per_match_bonus = 10;
    std::int64_t multiplier_activation_count = 100;
    double multiplier_scale = 1000.0;
    double high_quality_share = 0.90;
    double high_quality_factor = 2.0;
    double consensus_threshold = 0.25;
    std::int64_t min_responders_for_promotion = 5;
    std::int64_t leaderboard_size = 10;
    std::size_t max_label_length = 64;
    // Guests contribute to popularity tallies when set; they never reach
    // leaderboards or badges either way.
    bool count_guest_responses = true;
};

/// Returns cfg unchanged when every field is in range, otherwise throws
/// Error(ConfigOutOfRange) naming the first offending field.
EngineConfig validate_config(const EngineConfig& cfg);

/// Applies any fields present in `overrides` on top of `base`. Unknown keys
/// are rejected so typos in config files surface early.
EngineConfig merge_config(EngineConfig base, const nlohmann::json& overrides);

/// Popularity-matching key for a free-text label: trimmed, whitespace runs
/// collapsed to one space, case-folded. Length is counted in code points.
[[nodiscard]] std::string normalize_label(std::string_view raw, std::size_t max_length = 64);

/// Replaces malformed UTF-8 sequences with U+FFFD.
[[nodiscard]] std::string sanitize_utf8(std::string_view s);

/// Number of code points in valid UTF-8.
[[nodiscard]] std::size_t utf8_length(std::string_view s) noexcept;

void to_json(nlohmann::json& j, const Modality& m);
void from_json(const nlohmann::json& j, Modality& m);
void to_json(nlohmann::json& j, const Snippet& s);
void from_json(const nlohmann::json& j, Snippet& s);
void to_json(nlohmann::json& j, const PlayerAccount& a);
void from_json(const nlohmann::json& j, PlayerAccount& a);
void to_json(nlohmann::json& j, const EngineConfig& c);

} // namespace gwap
