#include "gwap/events.hpp"

#include <array>

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 14> kNames{{
    {EventKind::account_created, "account_created"},
    {EventKind::account_activated, "account_activated"},
    {EventKind::profile_updated, "profile_updated"},
    {EventKind::token_issued, "token_issued"},
    {EventKind::snippet_added, "snippet_added"},
    {EventKind::snippet_status, "snippet_status"},
    {EventKind::session_start, "session_start"},
    {EventKind::survey, "survey"},
    {EventKind::snippet_served, "snippet_served"},
    {EventKind::response, "response"},
    {EventKind::session_end, "session_end"},
    {EventKind::session_summary, "session_summary"},
    {EventKind::badge_award, "badge_award"},
    {EventKind::promotion, "promotion"},
}};

} // namespace

std::string_view to_string(EventKind k) noexcept
{
    for (const auto& [kind, name] : kNames)
        if (kind == k)
            return name;
    return "response";
}

EventKind parse_event_kind(std::string_view s)
{
    for (const auto& [kind, name] : kNames)
        if (name == s)
            return kind;
    throw Error(ErrorCode::ParseError, fmt::format("unknown event kind '{}'", s));
}

void to_json(nlohmann::json& j, const EventRecord& e)
{
    j = nlohmann::json{{"id", e.id}, {"kind", std::string(to_string(e.kind))}, {"at", e.at}, {"payload", e.payload}};
}

void from_json(const nlohmann::json& j, EventRecord& e)
{
    e.id = j.at("id").get<std::uint64_t>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.at = j.at("at").get<Timestamp>();
    e.payload = j.at("payload");
}

std::string serialize_event(const EventRecord& e) { return nlohmann::json(e).dump(); }

} // namespace gwap
