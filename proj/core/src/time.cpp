#include "twin/time.hpp"

#include <cctype>
#include <cstdio>

#include "twin/error.hpp"

namespace twin {

namespace {

using namespace std::chrono;

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw Error(ErrorCode::ParseError, "invalid RFC 3339 timestamp: '" + std::string(text) + "'");
}

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
  if (pos + count > text.size()) {
    bad_timestamp(text);
  }
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      bad_timestamp(text);
    }
    value = value * 10 + (c - '0');
  }
  pos += count;
  return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    bad_timestamp(text);
  }
  ++pos;
}

}  // namespace

Timestamp parse_rfc3339(std::string_view text) {
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
    bad_timestamp(text);
  }
  ++pos;
  const int h = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int mi = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int s = read_digits(text, pos, 2);

  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int scale = 100;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
      ++digits;
    }
    if (digits == 0) {
      bad_timestamp(text);
    }
  }

  minutes offset{0};
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '-' ? -1 : 1;
    ++pos;
    const int oh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int om = read_digits(text, pos, 2);
    offset = minutes{sign * (oh * 60 + om)};
  } else {
    bad_timestamp(text);
  }
  if (pos != text.size()) {
    bad_timestamp(text);
  }

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    bad_timestamp(text);
  }
  const auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{millis};
  return time_point_cast<milliseconds>(local - offset);
}

std::string format_rfc3339(Timestamp ts) {
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss tod{ts - day_point};
  char buf[40];
  const auto ms = tod.subseconds().count();
  if (ms != 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()), static_cast<long long>(ms));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()));
  }
  return buf;
}

std::string format_date(Timestamp ts) {
  const year_month_day ymd{floor<days>(ts)};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_minute(Timestamp ts) {
  const auto day_point = floor<days>(ts);
  const hh_mm_ss tod{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), " %02d:%02d", static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()));
  return format_date(ts) + buf;
}

double elapsed_days(Timestamp later, Timestamp earlier) {
  const auto diff = (later - earlier).count();
  return static_cast<double>(diff) / static_cast<double>(kMillisPerDay.count());
}

Timestamp floor_to_hour(Timestamp ts) { return time_point_cast<milliseconds>(floor<hours>(ts)); }

Timestamp floor_to_day(Timestamp ts) { return time_point_cast<milliseconds>(floor<days>(ts)); }

Clock system_clock() {
  return [] { return time_point_cast<milliseconds>(std::chrono::system_clock::now()); };
}

}  // namespace twin
