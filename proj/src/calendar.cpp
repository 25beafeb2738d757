#include "ringtrace/calendar.hpp"

#include <cstdio>

#include "ringtrace/errors.hpp"

namespace ringtrace {
namespace {

struct Civil {
    std::int64_t year;
    unsigned month; // 1..12
    unsigned day;   // 1..31
};

// Days-from-epoch to civil date (proleptic Gregorian).
Civil civil_from_days(std::int64_t z) {
    z += 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    std::uint64_t doe = static_cast<std::uint64_t>(z - era * 146097);
    std::uint64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    std::uint64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    std::uint64_t mp = (5 * doy + 2) / 153;
    unsigned d = static_cast<unsigned>(doy - (153 * mp + 2) / 5 + 1);
    unsigned m = static_cast<unsigned>(mp < 10 ? mp + 3 : mp - 9);
    return {y + (m <= 2), m, d};
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    std::uint64_t yoe = static_cast<std::uint64_t>(y - era * 400);
    std::uint64_t doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    std::uint64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

} // namespace

int month_key(std::int64_t unix_ts) {
    std::int64_t days = unix_ts / 86400;
    if (unix_ts < 0 && unix_ts % 86400 != 0)
        --days;
    Civil c = civil_from_days(days);
    return static_cast<int>(c.year * 12 + (c.month - 1));
}

std::string month_string(int key) {
    int year = key / 12;
    int month = key % 12;
    if (month < 0) {
        month += 12;
        --year;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month + 1);
    return buf;
}

std::int64_t parse_date(const std::string& iso_date) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(iso_date.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 ||
        d < 1 || d > 31)
        throw ConfigError("expected ISO date YYYY-MM-DD, got \"" + iso_date + "\"");
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d)) * 86400;
}

} // namespace ringtrace
