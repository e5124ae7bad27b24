#include "delirisk/dates.hpp"

#include <cctype>
#include <cstdio>

#include "delirisk/errors.hpp"

namespace delirisk {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
Day days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(Day z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool days_in_month_ok(std::int64_t y, unsigned m, unsigned d) {
    static const unsigned lengths[12] = {31, 28, 31, 30, 31, 30,
                                         31, 31, 30, 31, 30, 31};
    if (d == 0) return false;
    unsigned len = lengths[m - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) len = 29;
    return d <= len;
}

}  // namespace

Day parse_day(const std::string& text) {
    // Accepted forms: "YYYY-MM-DD" and "YYYY-MM-DD HH:MM:SS".
    auto fail = [&]() -> Day {
        throw InputError("unparseable timestamp: '" + text + "'");
    };
    std::size_t b = text.find_first_not_of(" \t");
    std::size_t e = text.find_last_not_of(" \t");
    if (b == std::string::npos) return fail();
    std::string s = text.substr(b, e - b + 1);
    if (s.size() != 10 && s.size() != 19) return fail();
    for (std::size_t i = 0; i < 10; ++i) {
        if (i == 4 || i == 7) {
            if (s[i] != '-') return fail();
        } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return fail();
        }
    }
    if (s.size() == 19) {
        for (std::size_t i = 10; i < 19; ++i) {
            if (i == 10) {
                if (s[i] != ' ') return fail();
            } else if (i == 13 || i == 16) {
                if (s[i] != ':') return fail();
            } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
                return fail();
            }
        }
        int hh = (s[11] - '0') * 10 + (s[12] - '0');
        int mi = (s[14] - '0') * 10 + (s[15] - '0');
        int ss = (s[17] - '0') * 10 + (s[18] - '0');
        if (hh > 23 || mi > 59 || ss > 59) return fail();
    }
    std::int64_t y = std::stoll(s.substr(0, 4));
    unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
    unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
    if (m < 1 || m > 12 || !days_in_month_ok(y, m, d)) return fail();
    return days_from_civil(y, m, d);
}

std::string format_day(Day day) {
    std::int64_t y;
    unsigned m, d;
    civil_from_days(day, y, m, d);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u",
                  static_cast<long long>(y), m, d);
    return buf;
}

}  // namespace delirisk
