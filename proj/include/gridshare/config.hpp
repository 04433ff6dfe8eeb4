#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridshare/curtailment.hpp"
#include "gridshare/stackelberg.hpp"
#include "gridshare/time.hpp"
#include "gridshare/windmodel.hpp"

namespace gridshare::config {

/// Flat `section.key` -> value map read from an INI file.
struct RawConfig {
  std::map<std::string, std::string> values;
  std::filesystem::path base_dir;  ///< relative paths resolve against this

  static RawConfig load(const std::filesystem::path& path);
  static RawConfig parse(const std::string& text, std::filesystem::path base_dir = ".");

  /// Applies "section.key=value".
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values[key] = value; }

  /// FNV-1a 64 over the sorted key=value lines, excluding run.out_dir.
  std::string hash() const;
};

enum class WindMode { synthetic, csv };
enum class DemandMode { constant, csv, profile, synthetic };
enum class EnergyMode { binned, replay };
enum class SweepKind { preset, custom };

struct RunConfig {
  // [run]
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  std::size_t bins = 20;

  // [wind]
  WindMode wind_mode = WindMode::synthetic;
  windmodel::WeibullParams weibull;  // c = 9, k = 1.8
  std::size_t hours = 8760;
  Timestamp start = parse_timestamp("2015-01-01T00:00Z");
  double correlation = 0.5;  ///< leader/follower blend for synthetic data
  std::filesystem::path leader_csv;
  std::filesystem::path follower_csv;
  double anemometer_height = 10.0;
  double hub_height = 85.0;
  double roughness = 0.03;

  // [turbine]
  windmodel::PowerCurve turbine = windmodel::PowerCurve::generic_cubic();

  // [fleet]
  std::vector<curtailment::GeneratorSpec> generators;
  std::vector<std::size_t> rotation;

  // [simulate]
  std::vector<curtailment::RuleKind> rules;
  std::vector<double> correlations;
  bool write_timeline = false;

  // [demand]
  DemandMode demand_mode = DemandMode::constant;
  double constant_mw = 6.0;
  std::filesystem::path demand_csv;
  std::filesystem::path profile_csv;
  double line_capacity_mw = 150.0;

  // [costs], resolved to currency/MWh
  stackelberg::CostParams costs;

  // [grid]
  stackelberg::StrategyGrid grid;
  EnergyMode energy_mode = EnergyMode::binned;
  double lifetime_hours = 145077.0;

  // [sweep], resolved to currency/MWh
  SweepKind sweep_kind = SweepKind::preset;
  int scenario = 1;
  stackelberg::CostParams sweep_base;
  stackelberg::SweepSpec sweep;

  std::string hash;

  curtailment::Fleet fleet() const;
};

/// Validates and resolves a raw config. Throws ConfigError naming the
/// offending `section.key`.
RunConfig resolve(const RawConfig& raw);

/// Every key understood by resolve(), with its default.
const std::map<std::string, std::string>& defaults();

}  // namespace gridshare::config
