#pragma once

#include <cstdint>
#include <string>

namespace delirisk {

/// Calendar timestamps are stored as whole days since 1970-01-01.
/// Monthly-resolution survival analysis does not need anything finer.
using Day = std::int64_t;

/// Days per month used to convert day spans to fractional months
/// (Julian year / 12).
inline constexpr double kDaysPerMonth = 30.4375;

/// Parse "YYYY-MM-DD" with an optional " HH:MM:SS" tail (the time part is
/// discarded). Throws InputError on malformed input.
Day parse_day(const std::string& text);

/// Format as "YYYY-MM-DD".
std::string format_day(Day day);

/// Day span in fractional months.
inline double months_between(Day from, Day to) {
    return static_cast<double>(to - from) / kDaysPerMonth;
}

}  // namespace delirisk
