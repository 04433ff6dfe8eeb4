#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/time.hpp"
#include "gridshare/windmodel.hpp"

namespace gridshare::ingest {

/// 1 kn in m/s.
inline constexpr double kKnotToMs = 0.5144;
/// Gaps of fewer missing hours than this are interpolated.
inline constexpr std::size_t kMaxFillHours = 6;

/// Non-fatal findings collected while reading or cleaning.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

struct RawWindRecord {
  Timestamp time;
  std::optional<int> speed_knots;  ///< empty field = missing
};

struct RawDemandRecord {
  Timestamp time;  ///< :00 or :30, start of the settlement period
  std::optional<double> demand_mw;
};

/// Header `timestamp,speed_knots`; whole-hour UTC timestamps, strictly
/// increasing; speeds are whole knots >= 0 or empty.
std::vector<RawWindRecord> parse_wind_csv(std::istream& in, const std::string& source,
                                          Diagnostics* diag = nullptr);
std::vector<RawWindRecord> parse_wind_csv(const std::filesystem::path& path,
                                          Diagnostics* diag = nullptr);

/// Header `timestamp,demand_mw`; half-hour UTC timestamps, strictly increasing.
std::vector<RawDemandRecord> parse_demand_csv(std::istream& in, const std::string& source,
                                              Diagnostics* diag = nullptr);
std::vector<RawDemandRecord> parse_demand_csv(const std::filesystem::path& path,
                                              Diagnostics* diag = nullptr);

double knots_to_ms(double knots);

/// A run of consecutive missing hours.
struct GapSpan {
  Timestamp first;  ///< first missing hour
  Timestamp last;   ///< last missing hour
  std::size_t hours = 0;
  bool filled = false;
};

/// Wind series after gap filling. Hours that stay missing are simply absent
/// from `series`.
struct CleanedWindSeries {
  windmodel::WindSeries series;  ///< m/s
  std::vector<int> knots;        ///< parallel to series.samples
  std::vector<bool> filled;      ///< parallel to series.samples
  std::vector<GapSpan> gaps;

  std::size_t filled_count() const;
  std::size_t missing_hours() const;
  /// Back to raw records (present values only).
  std::vector<RawWindRecord> records() const;
};

/// Interpolates gaps shorter than 6 h between flanking readings, rounding to
/// the nearest knot (halves away from zero). Longer gaps, and missing hours
/// before the first or after the last reading, stay missing.
CleanedWindSeries fill_gaps(std::span<const RawWindRecord> records,
                            const std::string& location_id = "station", double height_m = 10.0,
                            Diagnostics* diag = nullptr);

struct HourlyDemand {
  Timestamp time;
  double demand_mw = 0.0;
  int periods = 2;  ///< settlement periods that contributed
};

/// Mean of each hour's two half-hour periods; a lone period is used as is.
std::vector<HourlyDemand> demand_to_hourly(std::span<const RawDemandRecord> records,
                                           Diagnostics* diag = nullptr);

/// Mean per hour-season class, scaled so the largest class mean equals
/// `line_capacity_mw` exactly.
DemandProfile build_demand_profile(std::span<const HourlyDemand> hourly, double line_capacity_mw);

/// Timestamps present in every input. Throws DataError on fewer than two
/// inputs or an empty intersection.
std::vector<Timestamp> align(std::span<const std::vector<Timestamp>> series);

/// Values of `series` at `times`, which must be a subset of its timestamps.
std::vector<double> select(const windmodel::WindSeries& series, std::span<const Timestamp> times);
std::vector<double> select(std::span<const HourlyDemand> demand, std::span<const Timestamp> times);

/// timestamp,speed_knots,speed_ms,filled
void write_cleaned_csv(std::ostream& out, const CleanedWindSeries& cleaned,
                       const csv::Provenance& provenance = {});
/// Plain-text listing of every gap.
void write_coverage_report(std::ostream& out, std::span<const CleanedWindSeries> series);
/// timestamp,demand_mw,periods
void write_hourly_demand_csv(std::ostream& out, std::span<const HourlyDemand> hourly,
                             const csv::Provenance& provenance = {});
/// season,hour,demand_mw
void write_profile_csv(std::ostream& out, const DemandProfile& profile,
                       const csv::Provenance& provenance = {});

/// Reads a profile written by write_profile_csv.
DemandProfile read_profile_csv(std::istream& in, const std::string& source);

}  // namespace gridshare::ingest
