#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace twin {

// UTC instant with millisecond precision.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Injected time source. Nothing in the core reads the system clock directly.
using Clock = std::function<Timestamp()>;

inline constexpr std::chrono::milliseconds kMillisPerDay{86'400'000};

/// Parses an RFC 3339 timestamp ("2025-01-06T19:02:00Z", optional fractional
/// seconds, "Z" or a numeric offset). Throws Error(ParseError) on bad input.
Timestamp parse_rfc3339(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ", adding ".mmm" when the instant has
/// sub-second precision.
std::string format_rfc3339(Timestamp ts);

// "YYYY-MM-DD" of the UTC calendar day containing ts.
std::string format_date(Timestamp ts);

// "YYYY-MM-DD HH:MM" (UTC), used in prompt rendering.
std::string format_minute(Timestamp ts);

// Elapsed (later - earlier) in fractional days; negative if later < earlier.
double elapsed_days(Timestamp later, Timestamp earlier);

Timestamp floor_to_hour(Timestamp ts);
Timestamp floor_to_day(Timestamp ts);

Clock system_clock();

}  // namespace twin
