#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace amiroar {

/// Millisecond-resolution instants and durations. All simulation, playbook
/// and reporting time is virtual and expressed in these units.
using Duration = std::chrono::milliseconds;
using TimePoint = std::chrono::sys_time<Duration>;

constexpr std::int64_t to_epoch_ms(TimePoint t) { return t.time_since_epoch().count(); }
constexpr TimePoint from_epoch_ms(std::int64_t ms) { return TimePoint{Duration{ms}}; }

constexpr double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1000.0; }
Duration seconds_to_duration(double seconds);

/// Formats as `YYYY-MM-DDTHH:MM:SS.mmmZ`.
std::string format_iso8601(TimePoint t);

/// Accepts `YYYY-MM-DDTHH:MM:SS[.fff]Z`. Throws std::invalid_argument.
TimePoint parse_iso8601(std::string_view text);

/// Adds calendar months, clamping the day to the end of the target month.
TimePoint add_calendar_months(TimePoint t, int months);

/// 1-based month and day-of-year of the UTC date containing `t`.
unsigned month_of(TimePoint t);
unsigned day_of_year(TimePoint t);

/// Human-readable duration such as `23h 55m 00s`.
std::string format_duration(Duration d);

}  // namespace amiroar
