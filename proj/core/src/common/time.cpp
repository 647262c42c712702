#include "amiroar/common/time.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace amiroar {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) throw std::invalid_argument("timestamp too short: " + std::string(text));
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') throw std::invalid_argument("bad digit in timestamp: " + std::string(text));
    v = v * 10 + (c - '0');
  }
  return v;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c)
    throw std::invalid_argument("malformed timestamp: " + std::string(text));
}

}  // namespace

Duration seconds_to_duration(double seconds) {
  return Duration{static_cast<std::int64_t>(std::llround(seconds * 1000.0))};
}

std::string format_iso8601(TimePoint t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  year_month_day ymd{day};
  auto tod = t - day;
  auto h = duration_cast<hours>(tod);
  auto m = duration_cast<minutes>(tod - h);
  auto s = duration_cast<seconds>(tod - h - m);
  auto ms = duration_cast<milliseconds>(tod - h - m - s);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h.count()), static_cast<int>(m.count()), static_cast<int>(s.count()),
                static_cast<int>(ms.count()));
  return buf;
}

TimePoint parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  int y = parse_digits(text, 0, 4);
  expect_char(text, 4, '-');
  int mo = parse_digits(text, 5, 2);
  expect_char(text, 7, '-');
  int d = parse_digits(text, 8, 2);
  expect_char(text, 10, 'T');
  int hh = parse_digits(text, 11, 2);
  expect_char(text, 13, ':');
  int mm = parse_digits(text, 14, 2);
  expect_char(text, 16, ':');
  int ss = parse_digits(text, 17, 2);
  std::size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw std::invalid_argument("malformed fraction in timestamp: " + std::string(text));
    for (; digits < 3; ++digits) millis *= 10;
  }
  expect_char(text, pos, 'Z');
  if (pos + 1 != text.size()) throw std::invalid_argument("trailing characters in timestamp: " + std::string(text));

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60)
    throw std::invalid_argument("timestamp out of range: " + std::string(text));
  auto tp = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
  return time_point_cast<Duration>(tp);
}

TimePoint add_calendar_months(TimePoint t, int months_to_add) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  auto tod = t - day_point;
  year_month_day ymd{day_point};
  ymd += months{months_to_add};
  if (!ymd.ok()) ymd = ymd.year() / ymd.month() / last;
  return time_point_cast<Duration>(sys_days{ymd} + tod);
}

unsigned month_of(TimePoint t) {
  using namespace std::chrono;
  return static_cast<unsigned>(year_month_day{floor<days>(t)}.month());
}

unsigned day_of_year(TimePoint t) {
  using namespace std::chrono;
  auto d = floor<days>(t);
  year_month_day ymd{d};
  auto jan1 = sys_days{ymd.year() / January / 1};
  return static_cast<unsigned>((d - jan1).count()) + 1;
}

std::string format_duration(Duration d) {
  bool negative = d.count() < 0;
  auto total = negative ? -d.count() : d.count();
  auto secs = total / 1000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%lldh %02lldm %02llds", negative ? "-" : "",
                static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

}  // namespace amiroar
