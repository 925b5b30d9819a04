#include "gwap/clock.hpp"

#include <chrono>
#include <ctime>

#include <fmt/format.h>

namespace gwap {

Timestamp SystemClock::now()
{
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_utc(Timestamp t)
{
    const std::time_t secs = static_cast<std::time_t>(t / 1000);
    const auto millis = static_cast<int>(t % 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
}

} // namespace gwap
