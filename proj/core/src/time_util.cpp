#include "stance/time_util.hpp"

#include <array>
#include <cstdio>

namespace stance {

namespace {

// Howard Hinnant's civil calendar algorithms.
constexpr std::int64_t days_from_civil_impl(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Parses exactly n digits at s[pos..), advancing pos.
bool read_int(std::string_view s, size_t& pos, int n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (int i = 0; i < n; ++i) {
    if (!is_digit(s[pos + i])) return false;
    v = v * 10 + (s[pos + i] - '0');
  }
  pos += n;
  out = v;
  return true;
}

bool valid_date(int y, int mo, int d) {
  if (mo < 1 || mo > 12 || d < 1) return false;
  static constexpr std::array<int, 12> dim = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int max_d = dim[mo - 1];
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (mo == 2 && leap) max_d = 29;
  return d <= max_d;
}

}  // namespace

std::int64_t days_from_civil(const CivilDate& d) {
  return days_from_civil_impl(d.year, static_cast<unsigned>(d.month), static_cast<unsigned>(d.day));
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

CivilDate date_of(std::int64_t utc_seconds) {
  std::int64_t days = utc_seconds / 86400;
  if (utc_seconds < 0 && utc_seconds % 86400 != 0) --days;
  return civil_from_days(days);
}

std::optional<CivilDate> parse_date(std::string_view s) {
  size_t pos = 0;
  int y, mo, d;
  if (!read_int(s, pos, 4, y)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_int(s, pos, 2, mo)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_int(s, pos, 2, d)) return std::nullopt;
  if (pos != s.size()) return std::nullopt;
  if (!valid_date(y, mo, d)) return std::nullopt;
  return CivilDate{y, mo, d};
}

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  size_t pos = 0;
  int y, mo, d, hh, mm, ss;
  if (!read_int(s, pos, 4, y)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_int(s, pos, 2, mo)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_int(s, pos, 2, d)) return std::nullopt;
  if (!valid_date(y, mo, d)) return std::nullopt;
  if (pos >= s.size() || (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ')) return std::nullopt;
  ++pos;
  if (!read_int(s, pos, 2, hh)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ':') return std::nullopt;
  ++pos;
  if (!read_int(s, pos, 2, mm)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ':') return std::nullopt;
  ++pos;
  if (!read_int(s, pos, 2, ss)) return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  if (ss == 60) ss = 59;  // fold leap seconds

  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    if (pos >= s.size() || !is_digit(s[pos])) return std::nullopt;
    while (pos < s.size() && is_digit(s[pos])) ++pos;
  }

  std::int64_t offset = 0;
  if (pos < s.size()) {
    const char c = s[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      ++pos;
      int oh, om = 0;
      if (!read_int(s, pos, 2, oh)) return std::nullopt;
      if (pos < s.size() && s[pos] == ':') ++pos;
      if (pos < s.size()) {
        if (!read_int(s, pos, 2, om)) return std::nullopt;
      }
      if (oh > 14 || om > 59) return std::nullopt;
      offset = (static_cast<std::int64_t>(oh) * 60 + om) * 60;
      if (c == '-') offset = -offset;
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;

  const std::int64_t days = days_from_civil_impl(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return days * 86400 + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_iso8601(std::int64_t utc_seconds) {
  std::int64_t days = utc_seconds / 86400;
  std::int64_t sod = utc_seconds % 86400;
  if (sod < 0) {
    sod += 86400;
    --days;
  }
  const CivilDate cd = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", cd.year, cd.month, cd.day,
                static_cast<int>(sod / 3600), static_cast<int>((sod % 3600) / 60),
                static_cast<int>(sod % 60));
  return buf;
}

}  // namespace stance
