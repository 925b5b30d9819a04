#include "gwap/domain.hpp"

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

std::string_view to_string(Modality m) noexcept
{
    switch (m) {
    case Modality::text: return "text";
    case Modality::audio: return "audio";
    case Modality::video: return "video";
    }
    return "text";
}

Modality parse_modality(std::string_view s)
{
    for (auto m : kAllModalities)
        if (to_string(m) == s)
            return m;
    throw Error(ErrorCode::InvalidModality, fmt::format("unknown modality '{}'", s));
}

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at s[i] and advances i. Malformed input
// yields U+FFFD and consumes a single byte.
char32_t decode_one(std::string_view s, std::size_t& i) noexcept
{
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        ++i;
        return kReplacement;
    }
    if (i + len > s.size()) {
        ++i;
        return kReplacement;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kReplacement;
    }
    i += len;
    return cp;
}

void encode_one(char32_t cp, std::string& out)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char32_t cp) noexcept
{
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0xA0
           || cp == 0x3000 || (cp >= 0x2000 && cp <= 0x200A);
}

// Simple lowercase mapping for Latin, Greek and Cyrillic. The image of the
// mapping is a fixed point, which keeps normalization idempotent.
char32_t fold_case(char32_t cp) noexcept
{
    if (cp >= 'A' && cp <= 'Z')
        return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)
        return cp + 0x20;
    if (cp >= 0x100 && cp <= 0x137)
        return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148)
        return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177)
        return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x178)
        return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E)
        return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2)
        return cp + 0x20;
    if (cp == 0x386)
        return 0x3AC;
    if (cp >= 0x388 && cp <= 0x38A)
        return cp + 0x25;
    if (cp == 0x38C)
        return 0x3CC;
    if (cp == 0x38E || cp == 0x38F)
        return cp + 0x3F;
    if (cp >= 0x410 && cp <= 0x42F)
        return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F)
        return cp + 0x50;
    return cp;
}

} // namespace

std::string sanitize_utf8(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();)
        encode_one(decode_one(s, i), out);
    return out;
}

std::size_t utf8_length(std::string_view s) noexcept
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size();) {
        decode_one(s, i);
        ++n;
    }
    return n;
}

std::string normalize_label(std::string_view raw, std::size_t max_length)
{
    std::string out;
    out.reserve(raw.size());
    std::size_t length = 0;
    bool pending_space = false;
    for (std::size_t i = 0; i < raw.size();) {
        const char32_t cp = decode_one(raw, i);
        if (is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            ++length;
            pending_space = false;
        }
        encode_one(fold_case(cp), out);
        ++length;
    }
    if (out.empty())
        throw Error(ErrorCode::EmptyLabel, "label is empty");
    if (length > max_length)
        throw Error(ErrorCode::LabelTooLong,
                    fmt::format("label has {} characters, limit is {}", length, max_length));
    return out;
}

void check_snippet(const Snippet& s)
{
    std::string_view payload = s.payload;
    const auto first = payload.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) {
        throw Error(ErrorCode::WrongModalityPayload,
                    s.modality == Modality::text ? "text snippet has an empty body"
                                                 : "media snippet has an empty media reference");
    }
}

EngineConfig validate_config(const EngineConfig& cfg)
{
    auto fail = [](std::string_view field, auto value) {
        throw Error(ErrorCode::ConfigOutOfRange, fmt::format("{} out of range: {}", field, value));
    };
    if (!(cfg.consensus_threshold > 0.0 && cfg.consensus_threshold <= 1.0))
        fail("consensus_threshold", cfg.consensus_threshold);
    if (!(cfg.high_quality_share > 0.0 && cfg.high_quality_share <= 1.0))
        fail("high_quality_share", cfg.high_quality_share);
    if (cfg.consensus_threshold > cfg.high_quality_share)
        fail("consensus_threshold", cfg.consensus_threshold);
    if (cfg.base_points <= 0)
        fail("base_points", cfg.base_points);
    if (cfg.per_match_bonus < 0)
        fail("per_match_bonus", cfg.per_match_bonus);
    if (cfg.multiplier_activation_count < 1)
        fail("multiplier_activation_count", cfg.multiplier_activation_count);
    if (!(cfg.multiplier_scale > 0.0))
        fail("multiplier_scale", cfg.multiplier_scale);
    if (!(cfg.high_quality_factor >= 1.0))
        fail("high_quality_factor", cfg.high_quality_factor);
    if (cfg.min_responders_for_promotion < 1)
        fail("min_responders_for_promotion", cfg.min_responders_for_promotion);
    if (cfg.leaderboard_size < 1)
        fail("leaderboard_size", cfg.leaderboard_size);
    if (cfg.max_label_length < 1)
        fail("max_label_length", cfg.max_label_length);
    return cfg;
}

EngineConfig merge_config(EngineConfig cfg, const nlohmann::json& overrides)
{
    if (overrides.is_null())
        return cfg;
    if (!overrides.is_object())
        throw Error(ErrorCode::ConfigOutOfRange, "engine overrides must be an object");
    for (const auto& [key, value] : overrides.items()) {
        try {
            if (key == "base_points")
                cfg.base_points = value.get<Points>();
            else if (key == "per_match_bonus")
                cfg.per_match_bonus = value.get<Points>();
            else if (key == "multiplier_activation_count")
                cfg.multiplier_activation_count = value.get<std::int64_t>();
            else if (key == "multiplier_scale")
                cfg.multiplier_scale = value.get<double>();
            else if (key == "high_quality_share")
                cfg.high_quality_share = value.get<double>();
            else if (key == "high_quality_factor")
                cfg.high_quality_factor = value.get<double>();
            else if (key == "consensus_threshold")
                cfg.consensus_threshold = value.get<double>();
            else if (key == "min_responders_for_promotion")
                cfg.min_responders_for_promotion = value.get<std::int64_t>();
            else if (key == "leaderboard_size")
                cfg.leaderboard_size = value.get<std::int64_t>();
            else if (key == "max_label_length")
                cfg.max_label_length = value.get<std::size_t>();
            else if (key == "count_guest_responses")
                cfg.count_guest_responses = value.get<bool>();
            else
                throw Error(ErrorCode::ConfigOutOfRange, fmt::format("unknown engine setting '{}'", key));
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::ConfigOutOfRange, fmt::format("engine setting '{}' has the wrong type", key));
        }
    }
    return cfg;
}

void to_json(nlohmann::json& j, const Modality& m) { j = std::string(to_string(m)); }

void from_json(const nlohmann::json& j, Modality& m) { m = parse_modality(j.get<std::string>()); }

void to_json(nlohmann::json& j, const Snippet& s)
{
    j = nlohmann::json{{"id", s.id}, {"modality", s.modality}, {"active", s.active}};
    j[s.modality == Modality::text ? "text" : "media_uri"] = s.payload;
    if (s.title)
        j["title"] = *s.title;
    if (s.source)
        j["source"] = *s.source;
}

void from_json(const nlohmann::json& j, Snippet& s)
{
    s.id = j.at("id").get<SnippetId>();
    s.modality = j.at("modality").get<Modality>();
    s.payload = j.at(s.modality == Modality::text ? "text" : "media_uri").get<std::string>();
    s.title = j.contains("title") ? std::optional(j["title"].get<std::string>()) : std::nullopt;
    s.source = j.contains("source") ? std::optional(j["source"].get<std::string>()) : std::nullopt;
    s.active = j.value("active", true);
}

void to_json(nlohmann::json& j, const PlayerAccount& a)
{
    j = nlohmann::json{{"id", a.id},
                       {"display_name", a.display_name},
                       {"activated", a.activated},
                       {"guest", a.guest},
                       {"languages", a.languages},
                       {"privacy", a.privacy},
                       {"info_sheet_acknowledged", a.info_sheet_acknowledged}};
    j["email"] = a.email ? nlohmann::json(*a.email) : nlohmann::json(nullptr);
    j["age"] = a.age ? nlohmann::json(*a.age) : nlohmann::json(nullptr);
    j["avatar"] = a.avatar ? nlohmann::json(*a.avatar) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, PlayerAccount& a)
{
    a.id = j.at("id").get<PlayerId>();
    a.display_name = j.value("display_name", std::string{});
    a.activated = j.value("activated", false);
    a.guest = j.value("guest", false);
    a.languages = j.value("languages", std::vector<std::string>{});
    a.privacy = j.value("privacy", false);
    a.info_sheet_acknowledged = j.value("info_sheet_acknowledged", false);
    a.email = j.contains("email") && !j["email"].is_null() ? std::optional(j["email"].get<std::string>()) : std::nullopt;
    a.age = j.contains("age") && !j["age"].is_null() ? std::optional(j["age"].get<int>()) : std::nullopt;
    a.avatar =
        j.contains("avatar") && !j["avatar"].is_null() ? std::optional(j["avatar"].get<std::string>()) : std::nullopt;
}

void to_json(nlohmann::json& j, const EngineConfig& c)
{
    j = nlohmann::json{{"base_points", c.base_points},
                       {"per_match_bonus", c.per_match_bonus},
                       {"multiplier_activation_count", c.multiplier_activation_count},
                       {"multiplier_scale", c.multiplier_scale},
                       {"high_quality_share", c.high_quality_share},
                       {"high_quality_factor", c.high_quality_factor},
                       {"consensus_threshold", c.consensus_threshold},
                       {"min_responders_for_promotion", c.min_responders_for_promotion},
                       {"leaderboard_size", c.leaderboard_size},
                       {"max_label_length", c.max_label_length},
                       {"count_guest_responses", c.count_guest_responses}};
}

} // namespace gwap
