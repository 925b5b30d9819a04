#pragma once

#include <atomic>
#include <string>

#include "gwap/domain.hpp"

namespace gwap {

class Clock
{
public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual Timestamp now() = 0;
};

class SystemClock final : public Clock
{
public:
    Timestamp now() override;
};

/// Deterministic clock for tests and simulation: every reading advances
/// by a fixed step.
class ManualClock final : public Clock
{
public:
    explicit ManualClock(Timestamp start = 1'577'836'800'000, Timestamp step = 1000) : now_(start), step_(step) {}

    Timestamp now() override { return now_.fetch_add(step_); }
    void advance(Timestamp ms) { now_ += ms; }

private:
    std::atomic<Timestamp> now_;
    Timestamp step_;
};

/// "2020-01-01T00:00:00.000Z"
[[nodiscard]] std::string format_utc(Timestamp t);

} // namespace gwap
