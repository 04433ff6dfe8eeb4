#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridshare/config.hpp"
#include "gridshare/plot_data.hpp"
#include "gridshare/stackelberg.hpp"
#include "gridshare/windmodel.hpp"

namespace gridshare::pipeline {

inline constexpr const char* kSubcommands[] = {"synth-wind", "ingest",      "fit",
                                               "simulate",   "equilibrium", "sweep"};

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
};

struct Invocation {
  std::string subcommand;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::vector<std::string> overrides;  ///< "section.key=value"
};

/// Runs one subcommand. Errors are reported on `err` and mapped to exit
/// codes; files written before a failure are removed.
int run(const Invocation& inv, std::ostream& log, std::ostream& err);

/// Leader and follower hub-height wind on a shared hourly time axis.
struct WindPair {
  windmodel::WindSeries leader;
  windmodel::WindSeries follower;
};

WindPair load_wind(const config::RunConfig& cfg);

/// Smooth diurnal and seasonal shape peaking at `line_capacity_mw`.
DemandProfile synthetic_profile(double line_capacity_mw);

/// Demand (MW) at each of `times` under the configured demand mode.
std::vector<double> demand_series(const config::RunConfig& cfg, std::span<const Timestamp> times);

/// Per-generator normalized power. Synthetic wind: the first generator draws
/// the reference series and the others blend their own draw with it at
/// correlation `r`. CSV wind: each generator uses its configured source and
/// `r` is ignored.
std::vector<std::vector<double>> fleet_power(const config::RunConfig& cfg, double r,
                                             std::vector<Timestamp>* times = nullptr);

/// Every configured rule at every configured correlation.
std::vector<plot::SimulationRun> run_simulation(const config::RunConfig& cfg);

/// Energy model over the leader/follower data and configured demand.
std::unique_ptr<stackelberg::EnergyModel> energy_model(const config::RunConfig& cfg);

}  // namespace gridshare::pipeline
