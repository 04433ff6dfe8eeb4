#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>

namespace gridshare {

/// All timestamps are UTC, second resolution.
using Timestamp = std::chrono::sys_seconds;

inline constexpr std::chrono::hours kHour{1};

/// Parses "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may replace the 'T').
/// Throws DataError on anything else.
Timestamp parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MMZ", or "YYYY-MM-DDTHH:MM:SSZ" when seconds
/// are nonzero.
std::string format_timestamp(Timestamp t);

/// True when `t` falls exactly on a UTC hour boundary.
bool is_whole_hour(Timestamp t);

inline constexpr int kHourSeasonBins = 96;

/// One of the 96 (hour-of-day, season) classes.
///
/// hour is 1..24 with hour 1 = 00:00. season is 1 = Spring (Mar-May),
/// 2 = Summer (Jun-Aug), 3 = Autumn (Sep-Nov), 4 = Winter (Dec-Feb).
struct HourSeasonKey {
  int hour = 1;
  int season = 1;

  static HourSeasonKey from_time(Timestamp t);
  static HourSeasonKey from_index(std::size_t index);

  /// Dense index in [0, 96): (season - 1) * 24 + (hour - 1).
  std::size_t index() const;
  bool valid() const { return hour >= 1 && hour <= 24 && season >= 1 && season <= 4; }

  friend bool operator==(const HourSeasonKey&, const HourSeasonKey&) = default;
};

/// Season number (1..4) for a calendar month (1..12).
int season_of_month(unsigned month);

/// Mean demand in MW for each hour-season class.
struct DemandProfile {
  std::array<double, kHourSeasonBins> mw{};

  double at(HourSeasonKey key) const { return mw[key.index()]; }
  double at(Timestamp t) const { return at(HourSeasonKey::from_time(t)); }
  double peak() const;
};

}  // namespace gridshare
