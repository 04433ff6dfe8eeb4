#include "gridshare/time.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "gridshare/errors.hpp"

namespace gridshare {

namespace {

using namespace std::chrono;

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len,
                std::string_view whole) {
  if (pos + len > text.size()) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + len;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  const std::string_view whole = text;
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) {
    text.remove_suffix(1);
  }
  // YYYY-MM-DDTHH:MM[:SS]
  const int y = parse_fixed(text, 0, 4, whole);
  expect(text, 4, '-', whole);
  const int mo = parse_fixed(text, 5, 2, whole);
  expect(text, 7, '-', whole);
  const int d = parse_fixed(text, 8, 2, whole);
  if (text.size() < 11 || (text[10] != 'T' && text[10] != ' ')) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
  const int h = parse_fixed(text, 11, 2, whole);
  expect(text, 13, ':', whole);
  const int mi = parse_fixed(text, 14, 2, whole);
  int s = 0;
  if (text.size() > 16) {
    expect(text, 16, ':', whole);
    s = parse_fixed(text, 17, 2, whole);
    if (text.size() != 19) {
      throw DataError("malformed timestamp '" + std::string(whole) + "'");
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0) {
    throw DataError("timestamp out of range '" + std::string(whole) + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> hms{t - day_point};
  char buf[32];
  if (hms.seconds().count() != 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                  int(hms.minutes().count()), int(hms.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                  int(hms.minutes().count()));
  }
  return buf;
}

bool is_whole_hour(Timestamp t) { return floor<hours>(t) == t; }

int season_of_month(unsigned month) {
  switch (month) {
    case 3: case 4: case 5: return 1;
    case 6: case 7: case 8: return 2;
    case 9: case 10: case 11: return 3;
    case 12: case 1: case 2: return 4;
    default: throw std::invalid_argument("month out of range");
  }
}

HourSeasonKey HourSeasonKey::from_time(Timestamp t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const auto hour_of_day = duration_cast<hours>(t - day_point).count();
  return {static_cast<int>(hour_of_day) + 1, season_of_month(unsigned(ymd.month()))};
}

HourSeasonKey HourSeasonKey::from_index(std::size_t index) {
  if (index >= kHourSeasonBins) throw std::out_of_range("hour-season index");
  return {static_cast<int>(index % 24) + 1, static_cast<int>(index / 24) + 1};
}

std::size_t HourSeasonKey::index() const {
  if (!valid()) throw std::out_of_range("invalid hour-season key");
  return static_cast<std::size_t>((season - 1) * 24 + (hour - 1));
}

double DemandProfile::peak() const { return *std::max_element(mw.begin(), mw.end()); }

}  // namespace gridshare
