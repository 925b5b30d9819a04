#pragma once

#include <compare>
#include <ostream>
#include <string>
#include <utility>

#include <json.hpp>

namespace gwap {

/// String identifier tagged with the kind of entity it names, so a player id
/// cannot be passed where a snippet id is expected.
template <typename Tag>
class Id
{
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    [[nodiscard]] const std::string& str() const noexcept { return value_; }
    [[nodiscard]] bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value_; }

private:
    std::string value_;
};

using PlayerId = Id<struct PlayerTag>;
using SnippetId = Id<struct SnippetTag>;
using SessionId = Id<struct SessionTag>;

template <typename Tag>
void to_json(nlohmann::json& j, const Id<Tag>& id)
{
    j = id.str();
}

template <typename Tag>
void from_json(const nlohmann::json& j, Id<Tag>& id)
{
    id = Id<Tag>(j.get<std::string>());
}

} // namespace gwap
