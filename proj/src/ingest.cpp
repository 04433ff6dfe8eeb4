#include "gridshare/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "gridshare/errors.hpp"

namespace gridshare::ingest {

namespace {

using std::chrono::minutes;

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw DataError(source + ":" + std::to_string(line) + ": " + what);
}

// Calls row(fields, line_number) for each data line after checking the header.
template <class RowFn>
bool read_table(std::istream& in, const std::string& source,
                const std::vector<std::string>& header, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = csv::split_line(line);
    if (!seen_header) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        fail(source, line_no, "expected header '" + expected + "', got '" + line + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      fail(source, line_no,
           "expected " + std::to_string(header.size()) + " fields, got " +
               std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
  return seen_header;
}

Timestamp parse_time_at(const std::string& text, const std::string& source, std::size_t line) {
  try {
    return parse_timestamp(text);
  } catch (const DataError& e) {
    fail(source, line, e.what());
  }
}

void check_order(std::optional<Timestamp>& previous, Timestamp t, const std::string& source,
                 std::size_t line) {
  if (previous) {
    if (t == *previous) fail(source, line, "duplicate timestamp " + format_timestamp(t));
    if (t < *previous) fail(source, line, "out-of-order timestamp " + format_timestamp(t));
  }
  previous = t;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

long hours_between(Timestamp a, Timestamp b) {
  return static_cast<long>(std::chrono::duration_cast<std::chrono::hours>(b - a).count());
}

}  // namespace

std::vector<RawWindRecord> parse_wind_csv(std::istream& in, const std::string& source,
                                          Diagnostics* diag) {
  std::vector<RawWindRecord> out;
  std::optional<Timestamp> previous;
  const bool had_header =
      read_table(in, source, {"timestamp", "speed_knots"},
                 [&](const std::vector<std::string>& f, std::size_t line) {
                   const Timestamp t = parse_time_at(f[0], source, line);
                   if (!is_whole_hour(t)) {
                     fail(source, line, "timestamp " + f[0] + " is not on the hour");
                   }
                   check_order(previous, t, source, line);
                   RawWindRecord rec{t, std::nullopt};
                   if (!f[1].empty()) {
                     int knots = 0;
                     const char* end = f[1].data() + f[1].size();
                     auto [ptr, ec] = std::from_chars(f[1].data(), end, knots);
                     if (ec != std::errc{} || ptr != end || knots < 0) {
                       fail(source, line, "speed_knots '" + f[1] + "' is not a whole number >= 0");
                     }
                     rec.speed_knots = knots;
                   }
                   out.push_back(rec);
                 });
  if (out.empty() && diag) {
    diag->warn(source + (had_header ? ": no wind records" : ": empty file"));
  }
  return out;
}

std::vector<RawWindRecord> parse_wind_csv(const std::filesystem::path& path, Diagnostics* diag) {
  auto in = open_input(path);
  return parse_wind_csv(in, path.string(), diag);
}

std::vector<RawDemandRecord> parse_demand_csv(std::istream& in, const std::string& source,
                                              Diagnostics* diag) {
  std::vector<RawDemandRecord> out;
  std::optional<Timestamp> previous;
  const bool had_header =
      read_table(in, source, {"timestamp", "demand_mw"},
                 [&](const std::vector<std::string>& f, std::size_t line) {
                   const Timestamp t = parse_time_at(f[0], source, line);
                   const auto since_hour = t.time_since_epoch() % std::chrono::hours(1);
                   if (since_hour != minutes(0) && since_hour != minutes(30)) {
                     fail(source, line, "timestamp " + f[0] + " is not on a half hour");
                   }
                   check_order(previous, t, source, line);
                   RawDemandRecord rec{t, std::nullopt};
                   if (!f[1].empty()) {
                     double mw = 0.0;
                     const char* end = f[1].data() + f[1].size();
                     auto [ptr, ec] = std::from_chars(f[1].data(), end, mw);
                     if (ec != std::errc{} || ptr != end || !std::isfinite(mw) || mw < 0.0) {
                       fail(source, line, "demand_mw '" + f[1] + "' is not a number >= 0");
                     }
                     rec.demand_mw = mw;
                   }
                   out.push_back(rec);
                 });
  if (out.empty() && diag) {
    diag->warn(source + (had_header ? ": no demand records" : ": empty file"));
  }
  return out;
}

std::vector<RawDemandRecord> parse_demand_csv(const std::filesystem::path& path,
                                              Diagnostics* diag) {
  auto in = open_input(path);
  return parse_demand_csv(in, path.string(), diag);
}

double knots_to_ms(double knots) {
  if (!std::isfinite(knots) || knots < 0.0) throw std::invalid_argument("knots must be >= 0");
  return knots * kKnotToMs;
}

std::size_t CleanedWindSeries::filled_count() const {
  return static_cast<std::size_t>(std::count(filled.begin(), filled.end(), true));
}

std::size_t CleanedWindSeries::missing_hours() const {
  std::size_t total = 0;
  for (const auto& g : gaps) {
    if (!g.filled) total += g.hours;
  }
  return total;
}

std::vector<RawWindRecord> CleanedWindSeries::records() const {
  std::vector<RawWindRecord> out;
  out.reserve(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) out.push_back({series.samples[i].time, knots[i]});
  return out;
}

CleanedWindSeries fill_gaps(std::span<const RawWindRecord> records, const std::string& location_id,
                            double height_m, Diagnostics* diag) {
  CleanedWindSeries out;
  out.series.location_id = location_id;
  out.series.height_m = height_m;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i - 1].time < records[i].time)) {
      throw DataError("fill_gaps: records are not strictly increasing at " +
                      format_timestamp(records[i].time));
    }
  }

  auto push = [&](Timestamp t, int kn, bool filled) {
    out.series.samples.push_back({t, knots_to_ms(kn)});
    out.knots.push_back(kn);
    out.filled.push_back(filled);
  };
  auto leave_missing = [&](Timestamp first, Timestamp last) {
    const auto hours = static_cast<std::size_t>(hours_between(first, last)) + 1;
    out.gaps.push_back({first, last, hours, false});
    if (diag) {
      diag->warn(location_id + ": " + std::to_string(hours) + " h gap from " +
                 format_timestamp(first) + " left missing");
    }
  };

  std::optional<std::size_t> prev;  // index of the last present record
  std::optional<Timestamp> leading_missing;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (!rec.speed_knots) {
      if (!prev && !leading_missing) leading_missing = rec.time;
      continue;
    }
    if (!prev) {
      if (leading_missing) leave_missing(*leading_missing, rec.time - kHour);
    } else {
      const auto& left = records[*prev];
      const long gap = hours_between(left.time, rec.time) - 1;
      if (gap > 0) {
        const Timestamp first = left.time + kHour;
        const Timestamp last = rec.time - kHour;
        if (static_cast<std::size_t>(gap) < kMaxFillHours) {
          const double a = *left.speed_knots;
          const double b = *rec.speed_knots;
          const double span = static_cast<double>(gap + 1);
          for (long k = 1; k <= gap; ++k) {
            const double kk = static_cast<double>(k);
            const double v = (a * (span - kk) + b * kk) / span;
            push(left.time + k * kHour, static_cast<int>(std::round(v)), true);
          }
          out.gaps.push_back({first, last, static_cast<std::size_t>(gap), true});
        } else {
          leave_missing(first, last);
        }
      }
    }
    push(rec.time, *rec.speed_knots, false);
    prev = i;
  }
  if (prev && *prev + 1 < records.size()) {
    leave_missing(records[*prev + 1].time, records.back().time);
  } else if (!prev && leading_missing) {
    leave_missing(*leading_missing, records.back().time);
  }
  return out;
}

std::vector<HourlyDemand> demand_to_hourly(std::span<const RawDemandRecord> records,
                                           Diagnostics* diag) {
  // Period-beginning: HH:00 and HH:30 both belong to hour HH.
  std::map<Timestamp, std::pair<double, int>> hours;
  for (const auto& rec : records) {
    if (!rec.demand_mw) continue;
    const Timestamp hour = std::chrono::floor<std::chrono::hours>(rec.time);
    auto& slot = hours[hour];
    slot.first += *rec.demand_mw;
    slot.second += 1;
  }
  std::vector<HourlyDemand> out;
  out.reserve(hours.size());
  for (const auto& [t, acc] : hours) {
    if (acc.second == 1 && diag) {
      diag->warn("demand hour " + format_timestamp(t) + " has one settlement period");
    }
    out.push_back({t, acc.first / acc.second, acc.second});
  }
  return out;
}

DemandProfile build_demand_profile(std::span<const HourlyDemand> hourly, double line_capacity_mw) {
  if (!std::isfinite(line_capacity_mw) || !(line_capacity_mw > 0.0)) {
    throw std::invalid_argument("line capacity must be > 0");
  }
  std::array<double, kHourSeasonBins> sum{};
  std::array<std::size_t, kHourSeasonBins> count{};
  for (const auto& h : hourly) {
    const std::size_t k = HourSeasonKey::from_time(h.time).index();
    sum[k] += h.demand_mw;
    ++count[k];
  }
  DemandProfile profile;
  double peak = 0.0;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    if (count[k] == 0) {
      const auto key = HourSeasonKey::from_index(k);
      throw DataError("demand profile: no observations for hour " + std::to_string(key.hour) +
                      ", season " + std::to_string(key.season));
    }
    profile.mw[k] = sum[k] / static_cast<double>(count[k]);
    peak = std::max(peak, profile.mw[k]);
  }
  if (!(peak > 0.0)) throw DataError("demand profile: all bin means are zero");
  const double factor = line_capacity_mw / peak;
  for (double& v : profile.mw) v = v == peak ? line_capacity_mw : v * factor;
  return profile;
}

std::vector<Timestamp> align(std::span<const std::vector<Timestamp>> series) {
  if (series.size() < 2) throw DataError("align needs at least two series");
  std::vector<Timestamp> common(series[0].begin(), series[0].end());
  std::sort(common.begin(), common.end());
  for (std::size_t s = 1; s < series.size(); ++s) {
    std::vector<Timestamp> other(series[s].begin(), series[s].end());
    std::sort(other.begin(), other.end());
    std::vector<Timestamp> next;
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  common.erase(std::unique(common.begin(), common.end()), common.end());
  if (common.empty()) throw DataError("align: the series share no timestamps");
  return common;
}

std::vector<double> select(const windmodel::WindSeries& series, std::span<const Timestamp> times) {
  std::vector<double> out;
  out.reserve(times.size());
  auto it = series.samples.begin();
  for (Timestamp t : times) {
    it = std::lower_bound(it, series.samples.end(), t,
                          [](const windmodel::WindSample& s, Timestamp v) { return s.time < v; });
    if (it == series.samples.end() || it->time != t) {
      throw DataError(series.location_id + " has no sample at " + format_timestamp(t));
    }
    out.push_back(it->speed_ms);
  }
  return out;
}

std::vector<double> select(std::span<const HourlyDemand> demand, std::span<const Timestamp> times) {
  std::vector<double> out;
  out.reserve(times.size());
  auto it = demand.begin();
  for (Timestamp t : times) {
    it = std::lower_bound(it, demand.end(), t,
                          [](const HourlyDemand& d, Timestamp v) { return d.time < v; });
    if (it == demand.end() || it->time != t) {
      throw DataError("demand has no value at " + format_timestamp(t));
    }
    out.push_back(it->demand_mw);
  }
  return out;
}

void write_cleaned_csv(std::ostream& out, const CleanedWindSeries& cleaned,
                       const csv::Provenance& provenance) {
  csv::write_provenance(out, provenance);
  out << "timestamp,speed_knots,speed_ms,filled\n";
  for (std::size_t i = 0; i < cleaned.knots.size(); ++i) {
    csv::write_row(out, {format_timestamp(cleaned.series.samples[i].time),
                         std::to_string(cleaned.knots[i]),
                         csv::format_fixed(cleaned.series.samples[i].speed_ms, 4),
                         cleaned.filled[i] ? "1" : "0"});
  }
}

void write_coverage_report(std::ostream& out, std::span<const CleanedWindSeries> series) {
  for (const auto& s : series) {
    out << "location: " << s.series.location_id << '\n';
    out << "samples: " << s.series.samples.size() << '\n';
    out << "filled: " << s.filled_count() << '\n';
    out << "missing_hours: " << s.missing_hours() << '\n';
    if (!s.series.samples.empty()) {
      out << "first: " << format_timestamp(s.series.samples.front().time) << '\n';
      out << "last: " << format_timestamp(s.series.samples.back().time) << '\n';
    }
    for (const auto& g : s.gaps) {
      out << "gap " << format_timestamp(g.first) << " .. " << format_timestamp(g.last) << ' '
          << g.hours << "h " << (g.filled ? "filled" : "missing") << '\n';
    }
    out << '\n';
  }
}

void write_hourly_demand_csv(std::ostream& out, std::span<const HourlyDemand> hourly,
                             const csv::Provenance& provenance) {
  csv::write_provenance(out, provenance);
  out << "timestamp,demand_mw,periods\n";
  for (const auto& h : hourly) {
    csv::write_row(out, {format_timestamp(h.time), csv::format_fixed(h.demand_mw, 4),
                         std::to_string(h.periods)});
  }
}

void write_profile_csv(std::ostream& out, const DemandProfile& profile,
                       const csv::Provenance& provenance) {
  csv::write_provenance(out, provenance);
  out << "season,hour,demand_mw\n";
  for (std::size_t k = 0; k < profile.mw.size(); ++k) {
    const auto key = HourSeasonKey::from_index(k);
    csv::write_row(out, {std::to_string(key.season), std::to_string(key.hour),
                         csv::format_fixed(profile.mw[k], 6)});
  }
}

DemandProfile read_profile_csv(std::istream& in, const std::string& source) {
  DemandProfile profile;
  std::set<std::size_t> seen;
  read_table(in, source, {"season", "hour", "demand_mw"},
             [&](const std::vector<std::string>& f, std::size_t line) {
               HourSeasonKey key;
               double mw = 0.0;
               try {
                 key.season = std::stoi(f[0]);
                 key.hour = std::stoi(f[1]);
                 mw = std::stod(f[2]);
               } catch (const std::exception&) {
                 fail(source, line, "malformed profile row");
               }
               if (!key.valid() || !std::isfinite(mw) || mw < 0.0) {
                 fail(source, line, "profile row out of range");
               }
               if (!seen.insert(key.index()).second) fail(source, line, "duplicate profile bin");
               profile.mw[key.index()] = mw;
             });
  if (seen.size() != static_cast<std::size_t>(kHourSeasonBins)) {
    throw DataError(source + ": profile needs all 96 hour-season bins");
  }
  return profile;
}

}  // namespace gridshare::ingest
