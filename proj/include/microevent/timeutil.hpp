#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace microevent {

using Timestamp = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

// Accepts YYYY-MM-DD, YYYY-MM-DDTHH:MM[:SS[.fff]] with optional Z or +HH:MM
// offset (a space may replace the T). Fractional seconds are truncated.
std::optional<Timestamp> parse_iso8601(std::string_view text);

std::string format_iso8601(Timestamp ts);  // YYYY-MM-DDTHH:MM:SSZ
std::string format_day(Day day);           // YYYY-MM-DD
std::optional<Day> parse_day(std::string_view text);

inline Day day_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

// Monday of the ISO week containing `day`.
Day iso_week_start(Day day);

}  // namespace microevent
