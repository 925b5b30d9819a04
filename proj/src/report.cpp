#include "gwap/report.hpp"

#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

namespace {

double ratio(std::int64_t num, std::int64_t den)
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

AnnotationStats stats_report(std::span<const EventRecord> events)
{
    AnnotationStats s;
    std::set<std::string> labels;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& e : events) {
        switch (e.kind) {
        case EventKind::account_created:
            if (e.payload.at("account").value("guest", false))
                ++s.guests;
            else
                ++s.users;
            break;
        case EventKind::snippet_added: ++s.snippets; break;
        case EventKind::survey: ++s.surveys; break;
        case EventKind::badge_award: ++s.badges_awarded; break;
        case EventKind::response:
            if (e.payload.at("counted").get<bool>()) {
                ++s.annotations;
                auto label = e.payload.at("label").get<std::string>();
                pairs.emplace(label, e.payload.at("player").get<std::string>());
                labels.insert(std::move(label));
            }
            break;
        default: break;
        }
    }
    s.distinct_labels = static_cast<std::int64_t>(labels.size());
    s.label_user_associations = static_cast<std::int64_t>(pairs.size());
    s.avg_responses_per_label = ratio(s.annotations, s.distinct_labels);
    s.avg_users_per_label = ratio(s.label_user_associations, s.distinct_labels);
    s.badges_per_user = ratio(s.badges_awarded, s.users);
    return s;
}

AnnotationStats stats_report(const Store& store)
{
    const auto events = store.events();
    return stats_report(events);
}

std::string format_stats_table(const AnnotationStats& s)
{
    std::string out;
    auto row = [&](std::string_view name, const std::string& value) { out += fmt::format("{:<26}{:>12}\n", name, value); };
    row("users", fmt::format("{}", s.users));
    row("guests", fmt::format("{}", s.guests));
    row("snippets", fmt::format("{}", s.snippets));
    row("distinct_labels", fmt::format("{}", s.distinct_labels));
    row("annotations", fmt::format("{}", s.annotations));
    row("label_user_associations", fmt::format("{}", s.label_user_associations));
    row("avg_responses_per_label", fmt::format("{:.3f}", s.avg_responses_per_label));
    row("avg_users_per_label", fmt::format("{:.3f}", s.avg_users_per_label));
    row("surveys", fmt::format("{}", s.surveys));
    row("badges_awarded", fmt::format("{}", s.badges_awarded));
    row("badges_per_user", fmt::format("{:.3f}", s.badges_per_user));
    return out;
}

double expected_contribution(double throughput, double avg_play_hours)
{
    if (std::isnan(throughput) || std::isnan(avg_play_hours) || throughput < 0 || avg_play_hours < 0)
        throw Error(ErrorCode::NegativeInput, "throughput and play time must be non-negative numbers");
    return throughput * avg_play_hours;
}

void to_json(nlohmann::json& j, const AnnotationStats& s)
{
    j = nlohmann::json{{"users", s.users},
                       {"guests", s.guests},
                       {"snippets", s.snippets},
                       {"distinct_labels", s.distinct_labels},
                       {"annotations", s.annotations},
                       {"label_user_associations", s.label_user_associations},
                       {"avg_responses_per_label", s.avg_responses_per_label},
                       {"avg_users_per_label", s.avg_users_per_label},
                       {"surveys", s.surveys},
                       {"badges_awarded", s.badges_awarded},
                       {"badges_per_user", s.badges_per_user}};
}

} // namespace gwap
