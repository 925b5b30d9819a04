#include "gwap/event_log.hpp"

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

void EventLog::append(std::span<const EventRecord> batch)
{
    if (batch.empty())
        return;
    fault_armed_ = fault_after_.has_value();
    try {
        do_append(batch);
    } catch (...) {
        fault_after_.reset();
        fault_armed_ = false;
        throw;
    }
    fault_after_.reset();
    fault_armed_ = false;
}

void EventLog::inject_fault_after(std::size_t records) { fault_after_ = records; }

void EventLog::checkpoint(std::size_t index)
{
    if (fault_armed_ && fault_after_ && index >= *fault_after_)
        throw Error(ErrorCode::StorageFailure, fmt::format("simulated crash before write {}", index));
}

std::vector<EventRecord> MemoryEventLog::load_all() const
{
    std::lock_guard lock(mutex_);
    return records_;
}

void MemoryEventLog::do_append(std::span<const EventRecord> batch)
{
    std::lock_guard lock(mutex_);
    std::uint64_t last = records_.empty() ? 0 : records_.back().id;
    std::vector<EventRecord> staged;
    staged.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        checkpoint(i);
        if (batch[i].id <= last)
            throw Error(ErrorCode::ConflictRetry, fmt::format("event id {} already used", batch[i].id));
        last = batch[i].id;
        staged.push_back(batch[i]);
    }
    records_.insert(records_.end(), std::make_move_iterator(staged.begin()), std::make_move_iterator(staged.end()));
}

} // namespace gwap
