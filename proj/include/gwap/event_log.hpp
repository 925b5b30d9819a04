#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwap/events.hpp"

namespace gwap {

/// Durable home of the event log. Implementations must make append()
/// all-or-nothing.
class EventLog
{
public:
    virtual ~EventLog() = default;

    /// Appends the batch atomically. Throws Error(StorageFailure) or
    /// Error(ConflictRetry); on throw nothing from the batch is visible.
    void append(std::span<const EventRecord> batch);

    [[nodiscard]] virtual std::vector<EventRecord> load_all() const = 0;

    /// Arms a simulated crash: the next append fails after `records`
    /// sub-writes have gone through.
    void inject_fault_after(std::size_t records);

protected:
    virtual void do_append(std::span<const EventRecord> batch) = 0;

    /// Implementations call this before writing batch[index].
    void checkpoint(std::size_t index);

private:
    std::optional<std::size_t> fault_after_;
    bool fault_armed_ = false;
};

class MemoryEventLog final : public EventLog
{
public:
    [[nodiscard]] std::vector<EventRecord> load_all() const override;

protected:
    void do_append(std::span<const EventRecord> batch) override;

private:
    mutable std::mutex mutex_;
    std::vector<EventRecord> records_;
};

/// Event log in an SQLite database file, one row per event.
class SqliteEventLog final : public EventLog
{
public:
    explicit SqliteEventLog(const std::string& path);
    ~SqliteEventLog() override;

    SqliteEventLog(const SqliteEventLog&) = delete;
    SqliteEventLog& operator=(const SqliteEventLog&) = delete;

    [[nodiscard]] std::vector<EventRecord> load_all() const override;

protected:
    void do_append(std::span<const EventRecord> batch) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace gwap
