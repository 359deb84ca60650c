#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace stance {

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const CivilDate&) const = default;
};

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(const CivilDate& d);

CivilDate civil_from_days(std::int64_t days);

// UTC date of an epoch-seconds timestamp.
CivilDate date_of(std::int64_t utc_seconds);

// Parses "YYYY-MM-DD".
std::optional<CivilDate> parse_date(std::string_view s);

// Parses ISO-8601 timestamps of the forms
//   YYYY-MM-DDThh:mm:ss[.frac](Z|±hh:mm|±hhmm)
//   YYYY-MM-DD hh:mm:ss[.frac](Z|±hh:mm)   (space separator tolerated)
// Fractional seconds are truncated. Returns epoch seconds, UTC.
std::optional<std::int64_t> parse_iso8601(std::string_view s);

// Inverse of parse_iso8601, always "YYYY-MM-DDThh:mm:ssZ".
std::string format_iso8601(std::int64_t utc_seconds);

}  // namespace stance
