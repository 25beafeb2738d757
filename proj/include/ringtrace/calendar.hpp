#pragma once

#include <cstdint>
#include <string>

namespace ringtrace {

/// UTC calendar month of a unix timestamp, encoded as year*12 + (month-1).
int month_key(std::int64_t unix_ts);

/// "YYYY-MM" for a month key.
std::string month_string(int key);

/// Parses "YYYY-MM-DD" (UTC) to a unix timestamp at midnight.
std::int64_t parse_date(const std::string& iso_date);

} // namespace ringtrace
