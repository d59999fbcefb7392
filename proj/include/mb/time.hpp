#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "mb/error.hpp"

namespace mb {

// Wall-clock instants and durations carry whole seconds. Activity time (the
// clamped per-user axis decay runs on) uses the same duration type measured
// from the clock's origin.
using Duration = std::chrono::seconds;
using Timestamp = std::chrono::sys_seconds;
using ActivityTime = std::chrono::seconds;

inline constexpr Duration kDay{86400};
inline constexpr Duration kHour{3600};

inline double to_days(Duration d) {
  return static_cast<double>(d.count()) / 86400.0;
}

inline Duration days_to_duration(double days) {
  return Duration{static_cast<std::int64_t>(days * 86400.0 + (days >= 0 ? 0.5 : -0.5))};
}

namespace detail {

inline bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  const char* first = s.data() + pos;
  const char* last = first + len;
  for (const char* p = first; p != last; ++p) {
    if (*p < '0' || *p > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace detail

// Accepts exactly YYYY-MM-DDTHH:MM:SSZ.
inline Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto fail = [&]() -> Timestamp {
    throw Error(ErrorCode::MalformedDocument,
                "bad ISO-8601 UTC timestamp '" + std::string(text) + "'");
  };
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    return fail();
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!detail::parse_fixed(text, 0, 4, y) || !detail::parse_fixed(text, 5, 2, mo) ||
      !detail::parse_fixed(text, 8, 2, d) || !detail::parse_fixed(text, 11, 2, h) ||
      !detail::parse_fixed(text, 14, 2, mi) || !detail::parse_fixed(text, 17, 2, s)) {
    return fail();
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return fail();
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s};
}

inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  hh_mm_ss<seconds> hms{t - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

// "90s", "15m", "12h", "1d", or concatenations such as "1d12h".
inline Duration parse_duration(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::InvalidDuration, "empty duration");
  std::int64_t total = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr == text.data() + pos || ptr == text.data() + text.size()) {
      throw Error(ErrorCode::InvalidDuration, "bad duration '" + std::string(text) + "'");
    }
    pos = static_cast<std::size_t>(ptr - text.data());
    std::int64_t unit = 0;
    switch (text[pos]) {
      case 's': unit = 1; break;
      case 'm': unit = 60; break;
      case 'h': unit = 3600; break;
      case 'd': unit = 86400; break;
      default:
        throw Error(ErrorCode::InvalidDuration, "bad duration unit in '" + std::string(text) + "'");
    }
    if (value < 0) throw Error(ErrorCode::InvalidDuration, "negative duration");
    total += value * unit;
    ++pos;
  }
  return Duration{total};
}

}  // namespace mb
