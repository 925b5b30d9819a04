#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gwap/domain.hpp"

namespace gwap {

enum class EventKind {
    account_created,
    account_activated,
    profile_updated,
    token_issued,
    snippet_added,
    snippet_status,
    session_start,
    survey,
    snippet_served,
    response,
    session_end,
    session_summary,
    badge_award,
    promotion,
};

[[nodiscard]] std::string_view to_string(EventKind k) noexcept;

/// Throws Error(ParseError) for unknown names.
[[nodiscard]] EventKind parse_event_kind(std::string_view s);

/// One entry of the append-only log. Every piece of derived state is a
/// fold over these records in id order.
struct EventRecord
{
    std::uint64_t id = 0;
    EventKind kind = EventKind::response;
    Timestamp at = 0;
    nlohmann::json payload;
};

void to_json(nlohmann::json& j, const EventRecord& e);
void from_json(const nlohmann::json& j, EventRecord& e);

/// Single-line JSON form used by dumps and the SQLite payload column.
[[nodiscard]] std::string serialize_event(const EventRecord& e);

} // namespace gwap
