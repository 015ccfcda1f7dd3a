#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "wfr/error.hpp"

namespace wfr {

using SysSeconds = std::chrono::sys_seconds;
using SysDays = std::chrono::sys_days;
using Minutes = std::chrono::minutes;
using Date = std::chrono::year_month_day;

/// Timezone-aware instant: absolute UTC plus the local UTC offset in force.
struct Timestamp {
  SysSeconds utc{};
  Minutes offset{0};

  /// Local wall time, represented on the sys_seconds axis for civil math.
  SysSeconds local() const { return utc + offset; }

  Date local_date() const { return Date{std::chrono::floor<std::chrono::days>(local())}; }

  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    return a.utc == b.utc && a.offset == b.offset;
  }
  friend bool operator<(const Timestamp& a, const Timestamp& b) { return a.utc < b.utc; }
};

inline int date_to_yyyymmdd(const Date& d) {
  return int(d.year()) * 10000 + int(unsigned(d.month())) * 100 + int(unsigned(d.day()));
}

inline std::optional<Date> yyyymmdd_to_date(int v) {
  Date d{std::chrono::year(v / 10000), std::chrono::month(unsigned((v / 100) % 100)),
         std::chrono::day(unsigned(v % 100))};
  if (!d.ok()) return std::nullopt;
  return d;
}

inline std::string yyyymmdd_string(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08d", v);
  return buf;
}

inline Date add_days(const Date& d, int n) {
  return Date{SysDays(d) + std::chrono::days(n)};
}

inline int days_between(const Date& a, const Date& b) {
  return int((SysDays(b) - SysDays(a)).count());
}

inline std::string weekday_name(const Date& d) {
  static const char* names[] = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                "Thursday", "Friday", "Saturday"};
  return names[std::chrono::weekday(SysDays(d)).c_encoding()];
}

/// 0 = Sunday .. 6 = Saturday, matching std::chrono::weekday::c_encoding.
inline std::optional<unsigned> weekday_index(std::string_view name) {
  static const char* names[] = {"sunday",   "monday", "tuesday", "wednesday",
                                "thursday", "friday", "saturday"};
  std::string low;
  for (char c : name) low.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  for (unsigned i = 0; i < 7; ++i)
    if (low == names[i]) return i;
  return std::nullopt;
}

/// Strict ISO-8601: YYYY-MM-DDTHH:MM:SS followed by Z or +-HH:MM / +-HHMM.
inline Timestamp parse_timestamp(std::string_view s) {
  auto bad = [&]() -> Timestamp { fail(Errc::parse_error, "bad timestamp: " + std::string(s)); };
  auto digits = [&](size_t pos, size_t n) -> int {
    if (pos + n > s.size()) bad();
    int v = 0;
    for (size_t i = 0; i < n; ++i) {
      char c = s[pos + i];
      if (c < '0' || c > '9') bad();
      v = v * 10 + (c - '0');
    }
    return v;
  };
  if (s.size() < 20) bad();
  int y = digits(0, 4), mo = digits(5, 2), da = digits(8, 2);
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ')) bad();
  int hh = digits(11, 2), mi = digits(14, 2), se = digits(17, 2);
  if (s[13] != ':' || s[16] != ':') bad();
  Date date{std::chrono::year(y), std::chrono::month(unsigned(mo)), std::chrono::day(unsigned(da))};
  if (!date.ok() || hh > 23 || mi > 59 || se > 60) bad();

  Minutes offset{0};
  size_t p = 19;
  if (s[p] == 'Z') {
    if (p + 1 != s.size()) bad();
  } else if (s[p] == '+' || s[p] == '-') {
    int sign = s[p] == '+' ? 1 : -1;
    int oh = digits(p + 1, 2);
    size_t q = p + 3;
    if (q < s.size() && s[q] == ':') ++q;
    int om = digits(q, 2);
    if (q + 2 != s.size() || oh > 14 || om > 59) bad();
    offset = Minutes(sign * (oh * 60 + om));
  } else {
    bad();
  }
  SysSeconds local = SysDays(date) + std::chrono::hours(hh) + Minutes(mi) + std::chrono::seconds(se);
  return Timestamp{local - offset, offset};
}

inline std::string format_offset(Minutes off) {
  if (off == Minutes(0)) return "Z";
  long v = off.count();
  char sign = v < 0 ? '-' : '+';
  if (v < 0) v = -v;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%02d:%02d", sign, int(v / 60), int(v % 60));
  return buf;
}

inline std::string format_civil(SysSeconds t, char sep = 'T') {
  auto days = std::chrono::floor<std::chrono::days>(t);
  Date d{days};
  auto tod = std::chrono::hh_mm_ss<std::chrono::seconds>(t - days);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u%c%02d:%02d:%02d", int(d.year()),
                unsigned(d.month()), unsigned(d.day()), sep, int(tod.hours().count()),
                int(tod.minutes().count()), int(tod.seconds().count()));
  return buf;
}

inline std::string format_timestamp(const Timestamp& ts) {
  return format_civil(ts.local()) + format_offset(ts.offset);
}

inline std::string format_utc(SysSeconds t) { return format_civil(t) + "Z"; }

/// Compact UTC form used in cache file names: 20190927T084000Z.
inline std::string format_utc_compact(SysSeconds t) {
  auto days = std::chrono::floor<std::chrono::days>(t);
  Date d{days};
  auto tod = std::chrono::hh_mm_ss<std::chrono::seconds>(t - days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d%02u%02uT%02d%02d%02dZ", int(d.year()),
                unsigned(d.month()), unsigned(d.day()), int(tod.hours().count()),
                int(tod.minutes().count()), int(tod.seconds().count()));
  return buf;
}

/// Station zone: fixed standard offset plus, when observed, the 2007+ US DST
/// rule (spring forward second Sunday in March 02:00 local standard, fall
/// back first Sunday in November 02:00 local daylight).
struct TimeZone {
  std::string name;
  Minutes std_offset{0};
  bool us_dst = false;

  Minutes offset_at(SysSeconds utc) const {
    if (!us_dst) return std_offset;
    Date approx{std::chrono::floor<std::chrono::days>(utc + std_offset)};
    auto year = approx.year();
    auto nth_sunday = [&](std::chrono::month m, unsigned nth) {
      return SysDays(std::chrono::year_month_weekday(year, m, std::chrono::Sunday[nth]));
    };
    SysSeconds dst_begin = nth_sunday(std::chrono::March, 2) + std::chrono::hours(2) - std_offset;
    SysSeconds dst_end =
        nth_sunday(std::chrono::November, 1) + std::chrono::hours(2) - (std_offset + Minutes(60));
    if (utc >= dst_begin && utc < dst_end) return std_offset + Minutes(60);
    return std_offset;
  }

  Timestamp to_local(SysSeconds utc) const { return Timestamp{utc, offset_at(utc)}; }
};

inline TimeZone fixed_zone(Minutes offset, std::string name = "fixed") {
  return TimeZone{std::move(name), offset, false};
}

}  // namespace wfr
