#include "gridshare/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gridshare/curtailment.hpp"
#include "gridshare/errors.hpp"
#include "gridshare/ingest.hpp"
#include "gridshare/random.hpp"

namespace gridshare::pipeline {

namespace fs = std::filesystem;
using config::RunConfig;

namespace {

// Tracks files written by one invocation so a failure leaves nothing behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    created_dir_ = !fs::exists(dir_);
    fs::create_directories(dir_);
  }
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ostringstream buf;
    body(buf);
    const fs::path path = dir_ / name;
    written_.push_back(path);
    std::ofstream out(path, std::ios::binary);
    out << buf.str();
    if (!out) throw DataError("cannot write " + path.string());
  }

  const std::vector<fs::path>& written() const { return written_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool created_dir_ = false;
  bool committed_ = false;
};

std::vector<Timestamp> hourly_times(Timestamp start, std::size_t n) {
  std::vector<Timestamp> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start + kHour * static_cast<long>(i);
  return out;
}

windmodel::WindSeries synthetic_series(const RunConfig& cfg, std::uint64_t stream,
                                       const std::string& location) {
  return windmodel::sample_wind(cfg.weibull, cfg.hours, derive_seed(cfg.seed, stream),
                                {location, cfg.hub_height, cfg.start});
}

ingest::CleanedWindSeries load_cleaned(const fs::path& path, double height,
                                       ingest::Diagnostics* diag) {
  const auto records = ingest::parse_wind_csv(path, diag);
  return ingest::fill_gaps(records, path.stem().string(), height, diag);
}

windmodel::WindSeries restrict(const windmodel::WindSeries& s, std::span<const Timestamp> times) {
  const auto speeds = ingest::select(s, times);
  windmodel::WindSeries out{s.location_id, s.height_m, {}};
  out.samples.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out.samples.push_back({times[i], speeds[i]});
  return out;
}

// Every table names its config and seed, even when no draw was made.
csv::Provenance provenance(const RunConfig& cfg) { return {cfg.hash, cfg.seed, true}; }

std::string correlation_label(double r) { return "r=" + csv::format_double(r); }

// ---- subcommands ----------------------------------------------------------

void cmd_synth_wind(const RunConfig& cfg, OutputSet& out, std::ostream& log) {
  const auto pair = load_wind(cfg);
  for (const auto* s : {&pair.leader, &pair.follower}) {
    out.write("wind_" + s->location_id + ".csv", [&](std::ostream& os) {
      csv::write_provenance(os, provenance(cfg));
      os << "timestamp,speed_ms\n";
      for (const auto& sample : s->samples) {
        csv::write_row(os, {format_timestamp(sample.time), csv::format_fixed(sample.speed_ms, 4)});
      }
    });
  }
  log << "wrote " << pair.leader.size() << " hours for leader and follower\n";
}

void cmd_ingest(const RunConfig& cfg, OutputSet& out, std::ostream& log) {
  ingest::Diagnostics diag;
  std::vector<ingest::CleanedWindSeries> cleaned;
  for (const auto& path : {cfg.leader_csv, cfg.follower_csv}) {
    if (path.empty()) continue;
    cleaned.push_back(load_cleaned(path, cfg.anemometer_height, &diag));
    const auto& c = cleaned.back();
    out.write("cleaned_" + c.series.location_id + ".csv",
              [&](std::ostream& os) { ingest::write_cleaned_csv(os, c, provenance(cfg)); });
  }
  if (!cleaned.empty()) {
    out.write("coverage_report.txt",
              [&](std::ostream& os) { ingest::write_coverage_report(os, cleaned); });
  }
  if (cleaned.size() == 2) {
    std::vector<std::vector<Timestamp>> axes{cleaned[0].series.times(), cleaned[1].series.times()};
    log << "jointly valid hours: " << ingest::align(axes).size() << '\n';
  }
  if (!cfg.demand_csv.empty()) {
    const auto raw = ingest::parse_demand_csv(cfg.demand_csv, &diag);
    const auto hourly = ingest::demand_to_hourly(raw, &diag);
    out.write("demand_hourly.csv", [&](std::ostream& os) {
      ingest::write_hourly_demand_csv(os, hourly, provenance(cfg));
    });
    const auto profile = ingest::build_demand_profile(hourly, cfg.line_capacity_mw);
    out.write("demand_profile.csv", [&](std::ostream& os) {
      ingest::write_profile_csv(os, profile, provenance(cfg));
    });
  }
  if (cleaned.empty() && cfg.demand_csv.empty()) {
    throw ConfigError("wind.leader_csv: ingest needs wind.leader_csv, wind.follower_csv or demand.csv");
  }
  for (const auto& w : diag.warnings) log << "warning: " << w << '\n';
}

void cmd_fit(const RunConfig& cfg, OutputSet& out, std::ostream& log) {
  const auto pair = load_wind(cfg);
  const auto times = pair.leader.times();
  std::vector<std::vector<std::size_t>> by_bin(kHourSeasonBins);
  for (std::size_t t = 0; t < times.size(); ++t) {
    by_bin[HourSeasonKey::from_time(times[t]).index()].push_back(t);
  }
  auto pick = [](const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
  };

  std::ostringstream weibull, beta;
  csv::write_provenance(weibull, provenance(cfg));
  weibull << "location,season,hour,scale_c,shape_k,used,excluded_zeros,status\n";
  csv::write_provenance(beta, provenance(cfg));
  beta << "location,season,hour,alpha,beta,status\n";
  std::size_t failures = 0;
  std::vector<std::vector<double>> power;
  for (const auto* s : {&pair.leader, &pair.follower}) {
    const auto speeds = s->speeds();
    const auto overall = windmodel::fit_weibull(speeds);  // failure here is fatal
    csv::write_row(weibull, {s->location_id, "0", "0", csv::format_double(overall.params.scale_c),
                             csv::format_double(overall.params.shape_k),
                             std::to_string(overall.used), std::to_string(overall.excluded_zeros),
                             "ok"});
    power.push_back(windmodel::wind_to_power(speeds, cfg.turbine));
    for (std::size_t k = 0; k < by_bin.size(); ++k) {
      const auto key = HourSeasonKey::from_index(k);
      const std::string season = std::to_string(key.season), hour = std::to_string(key.hour);
      try {
        const auto fit = windmodel::fit_weibull(pick(speeds, by_bin[k]));
        csv::write_row(weibull, {s->location_id, season, hour,
                                 csv::format_double(fit.params.scale_c),
                                 csv::format_double(fit.params.shape_k), std::to_string(fit.used),
                                 std::to_string(fit.excluded_zeros), "ok"});
      } catch (const windmodel::FitError& e) {
        ++failures;
        csv::write_row(weibull, {s->location_id, season, hour, "", "", std::to_string(e.samples()),
                                 std::to_string(e.excluded()), "fit_failed"});
      }
      try {
        const auto fit = windmodel::fit_beta(pick(power.back(), by_bin[k]));
        csv::write_row(beta, {s->location_id, season, hour, csv::format_double(fit.alpha),
                              csv::format_double(fit.beta), "ok"});
      } catch (const windmodel::FitError&) {
        ++failures;
        csv::write_row(beta, {s->location_id, season, hour, "", "", "fit_failed"});
      }
    }
  }
  out.write("weibull.csv", [&](std::ostream& os) { os << weibull.str(); });
  out.write("beta.csv", [&](std::ostream& os) { os << beta.str(); });
  out.write("joint_histogram.csv", [&](std::ostream& os) {
    csv::write_provenance(os, provenance(cfg));
    os << "season,hour,i1,i2,probability,mean_x1,mean_x2\n";
    for (std::size_t k = 0; k < by_bin.size(); ++k) {
      if (by_bin[k].empty()) continue;
      const auto key = HourSeasonKey::from_index(k);
      const auto h = windmodel::joint_histogram(pick(power[0], by_bin[k]),
                                                pick(power[1], by_bin[k]), key, cfg.bins);
      for (std::size_t i1 = 0; i1 < cfg.bins; ++i1) {
        for (std::size_t i2 = 0; i2 < cfg.bins; ++i2) {
          const auto& c = h.cell(i1, i2);
          if (!(c.probability > 0.0)) continue;
          csv::write_row(os, {std::to_string(key.season), std::to_string(key.hour),
                              std::to_string(i1), std::to_string(i2),
                              csv::format_double(c.probability), csv::format_double(c.mean_x1),
                              csv::format_double(c.mean_x2)});
        }
      }
    }
  });
  log << "fitted " << pair.leader.size() << " hours; " << failures << " bin fits failed\n";
}

void cmd_simulate(const RunConfig& cfg, OutputSet& out, std::ostream& log) {
  const auto runs = run_simulation(cfg);
  const auto prov = provenance(cfg);
  out.write("metrics.csv", [&](std::ostream& os) {
    csv::write_provenance(os, prov);
    os << "wind,rule,generator_id,cf,cf_uncurtailed,cf_reduction,events\n";
    for (const auto& run : runs) {
      for (const auto& m : run.result.metrics) {
        csv::write_row(os, {run.label, std::string(curtailment::to_string(run.result.rule)),
                            m.generator_id, csv::format_double(m.capacity_factor),
                            csv::format_double(m.cf_uncurtailed),
                            csv::format_double(m.cf_reduction()), std::to_string(m.event_count)});
      }
    }
  });
  out.write("summary.csv", [&](std::ostream& os) {
    csv::write_provenance(os, prov);
    os << "wind,rule,fairness_variance,mean_cf,mean_events\n";
    for (const auto& run : runs) {
      csv::write_row(os, {run.label, std::string(curtailment::to_string(run.result.rule)),
                          csv::format_double(run.result.fairness_variance),
                          csv::format_double(run.result.mean_capacity_factor()),
                          csv::format_double(run.result.mean_event_count())});
    }
  });
  out.write("plot_cf.csv", [&](std::ostream& os) {
    plot::write_points(os, plot::cf_points(runs), prov);
  });
  out.write("plot_fairness.csv", [&](std::ostream& os) {
    plot::write_points(os, plot::fairness_points(runs), prov);
  });
  out.write("plot_events.csv", [&](std::ostream& os) {
    plot::write_points(os, plot::event_points(runs), prov);
  });
  if (cfg.write_timeline) {
    const auto fleet = cfg.fleet();
    std::vector<Timestamp> times;
    (void)fleet_power(cfg, cfg.correlations.front(), &times);
    for (const auto& run : runs) {
      const std::string name = "timeline_" + std::string(curtailment::to_string(run.result.rule)) +
                               "_" + run.label + ".csv";
      out.write(name, [&](std::ostream& os) {
        curtailment::write_timeline_csv(os, run.result, fleet, times, prov);
      });
    }
  }
  log << "simulated " << runs.size() << " rule/wind combinations\n";
}

void write_equilibrium_row(std::ostream& os, const stackelberg::CostParams& c,
                           const stackelberg::EquilibriumResult& r) {
  using csv::format_double;
  os << "p_g,p_t,c_g1,c_g2,c_t,p_n1_star,p_n2_star,profit1,profit2,e_g1,e_g2,e_c1,e_c2,"
        "viable1,viable2\n";
  csv::write_row(os, {format_double(c.p_g), format_double(c.p_t), format_double(c.c_g1),
                      format_double(c.c_g2), format_double(c.c_t), format_double(r.p_n1_star),
                      format_double(r.p_n2_star), format_double(r.profit1),
                      format_double(r.profit2), format_double(r.energies.e_g1),
                      format_double(r.energies.e_g2), format_double(r.energies.e_c1),
                      format_double(r.energies.e_c2), r.viable1 ? "1" : "0",
                      r.viable2 ? "1" : "0"});
}

void cmd_equilibrium(const RunConfig& cfg, OutputSet& out, std::ostream& log) {
  const auto model = energy_model(cfg);
  const stackelberg::EnergySurface surface(*model, cfg.grid);
  const auto result = stackelberg::solve_equilibrium(surface, cfg.costs);
  const auto prov = provenance(cfg);
  out.write("equilibrium.csv", [&](std::ostream& os) {
    csv::write_provenance(os, prov);
    write_equilibrium_row(os, cfg.costs, result);
  });
  out.write("response_curve.csv",
            [&](std::ostream& os) { stackelberg::write_response_csv(os, result, prov); });
  log << "equilibrium P_N1* = " << result.p_n1_star << " MW, P_N2* = " << result.p_n2_star
      << " MW\n";
  if (!result.viable1 || !result.viable2) log << "warning: equilibrium is not viable for both players\n";
}

void cmd_sweep(const RunConfig& cfg, OutputSet& out, std::ostream& log) {
  const auto model = energy_model(cfg);
  const stackelberg::EnergySurface surface(*model, cfg.grid);
  const auto rows = stackelberg::scenario_sweep(surface, cfg.sweep_base, cfg.sweep);
  const auto prov = provenance(cfg);
  const double p_g = cfg.sweep_base.p_g;
  out.write("sweep.csv", [&](std::ostream& os) { stackelberg::write_sweep_csv(os, rows, prov); });
  out.write("plot_sweep_capacity.csv", [&](std::ostream& os) {
    plot::write_points(os, plot::sweep_capacity_points(rows, p_g), prov);
  });
  out.write("plot_sweep_profit.csv", [&](std::ostream& os) {
    plot::write_points(os, plot::sweep_profit_points(rows, p_g), prov);
  });
  out.write("plot_sweep_energy.csv", [&](std::ostream& os) {
    plot::write_points(os, plot::sweep_energy_points(rows, p_g), prov);
  });
  log << "swept " << rows.size() << " values of " << stackelberg::to_string(cfg.sweep.param)
      << '\n';
}

}  // namespace

WindPair load_wind(const RunConfig& cfg) {
  if (cfg.wind_mode == config::WindMode::synthetic) {
    WindPair pair;
    pair.leader = synthetic_series(cfg, 0, "leader");
    pair.follower =
        windmodel::correlate(pair.leader, synthetic_series(cfg, 1, "follower"), cfg.correlation);
    return pair;
  }
  auto leader = load_cleaned(cfg.leader_csv, cfg.anemometer_height, nullptr);
  auto follower = load_cleaned(cfg.follower_csv, cfg.anemometer_height, nullptr);
  std::vector<std::vector<Timestamp>> axes{leader.series.times(), follower.series.times()};
  const auto common = ingest::align(axes);
  auto hub = [&](const windmodel::WindSeries& s) {
    return windmodel::extrapolate_hub(restrict(s, common), cfg.anemometer_height, cfg.hub_height,
                                      cfg.roughness);
  };
  return {hub(leader.series), hub(follower.series)};
}

DemandProfile synthetic_profile(double line_capacity_mw) {
  constexpr double kSeason[] = {0.90, 0.80, 0.92, 1.00};  // spring .. winter
  DemandProfile p;
  double peak = 0.0;
  for (std::size_t k = 0; k < p.mw.size(); ++k) {
    const auto key = HourSeasonKey::from_index(k);
    const double clock = key.hour - 1;
    const double day = std::max(0.0, std::sin(std::numbers::pi * (clock - 5.0) / 16.0));
    const double evening = std::exp(-(clock - 18.5) * (clock - 18.5) / 4.0);
    p.mw[k] = kSeason[key.season - 1] * (0.72 + 0.18 * day + 0.10 * evening);
    peak = std::max(peak, p.mw[k]);
  }
  for (double& v : p.mw) v = v == peak ? line_capacity_mw : v * (line_capacity_mw / peak);
  return p;
}

std::vector<double> demand_series(const RunConfig& cfg, std::span<const Timestamp> times) {
  DemandProfile profile;
  switch (cfg.demand_mode) {
    case config::DemandMode::constant:
      return std::vector<double>(times.size(), cfg.constant_mw);
    case config::DemandMode::csv: {
      const auto hourly = ingest::demand_to_hourly(ingest::parse_demand_csv(cfg.demand_csv));
      profile = ingest::build_demand_profile(hourly, cfg.line_capacity_mw);
      break;
    }
    case config::DemandMode::profile: {
      std::ifstream in(cfg.profile_csv);
      if (!in) throw DataError("cannot open " + cfg.profile_csv.string());
      profile = ingest::read_profile_csv(in, cfg.profile_csv.string());
      break;
    }
    case config::DemandMode::synthetic:
      profile = synthetic_profile(cfg.line_capacity_mw);
      break;
  }
  std::vector<double> out;
  out.reserve(times.size());
  for (Timestamp t : times) out.push_back(profile.at(t));
  return out;
}

std::vector<std::vector<double>> fleet_power(const RunConfig& cfg, double r,
                                             std::vector<Timestamp>* times) {
  std::vector<std::vector<double>> out;
  if (cfg.wind_mode == config::WindMode::synthetic) {
    const auto reference = synthetic_series(cfg, 0, cfg.generators.front().id);
    out.push_back(windmodel::wind_to_power(reference, cfg.turbine));
    for (std::size_t i = 1; i < cfg.generators.size(); ++i) {
      const auto own = synthetic_series(cfg, i, cfg.generators[i].id);
      out.push_back(windmodel::wind_to_power(windmodel::correlate(reference, own, r), cfg.turbine));
    }
    if (times) *times = hourly_times(cfg.start, cfg.hours);
    return out;
  }
  const auto pair = load_wind(cfg);
  const auto leader = windmodel::wind_to_power(pair.leader, cfg.turbine);
  const auto follower = windmodel::wind_to_power(pair.follower, cfg.turbine);
  for (const auto& g : cfg.generators) out.push_back(g.wind_source == "follower" ? follower : leader);
  if (times) *times = pair.leader.times();
  return out;
}

std::vector<plot::SimulationRun> run_simulation(const RunConfig& cfg) {
  const auto fleet = cfg.fleet();
  std::vector<plot::SimulationRun> runs;
  const bool synthetic = cfg.wind_mode == config::WindMode::synthetic;
  const std::vector<double> correlations =
      synthetic ? cfg.correlations : std::vector<double>{0.0};
  for (double r : correlations) {
    std::vector<Timestamp> times;
    const auto power = fleet_power(cfg, r, &times);
    const auto demand = demand_series(cfg, times);
    for (auto rule : cfg.rules) {
      runs.push_back({synthetic ? correlation_label(r) : std::string("data"),
                      curtailment::simulate(fleet, power, demand, rule)});
    }
  }
  return runs;
}

std::unique_ptr<stackelberg::EnergyModel> energy_model(const RunConfig& cfg) {
  const auto pair = load_wind(cfg);
  const auto times = pair.leader.times();
  auto x1 = windmodel::wind_to_power(pair.leader, cfg.turbine);
  auto x2 = windmodel::wind_to_power(pair.follower, cfg.turbine);
  auto demand = demand_series(cfg, times);
  if (cfg.energy_mode == config::EnergyMode::replay) {
    return std::make_unique<stackelberg::ReplayEnergyModel>(std::move(x1), std::move(x2),
                                                            std::move(demand), cfg.lifetime_hours);
  }
  return std::make_unique<stackelberg::BinnedEnergyModel>(
      stackelberg::BinnedEnergyModel::from_series(x1, x2, demand, times, cfg.bins,
                                                  cfg.lifetime_hours));
}

int run(const Invocation& inv, std::ostream& log, std::ostream& err) {
  const auto known = std::find_if(std::begin(kSubcommands), std::end(kSubcommands),
                                  [&](const char* s) { return inv.subcommand == s; });
  if (known == std::end(kSubcommands)) {
    err << "error: unknown subcommand '" << inv.subcommand << "'\n";
    return kConfig;
  }
  try {
    config::RawConfig raw = inv.config ? config::RawConfig::load(*inv.config)
                                       : config::RawConfig::parse("", fs::current_path());
    for (const auto& o : inv.overrides) raw.set(o);
    if (inv.seed) raw.set("run.seed", std::to_string(*inv.seed));
    if (inv.out) raw.set("run.out_dir", inv.out->string());
    const RunConfig cfg = config::resolve(raw);

    OutputSet out(cfg.out_dir);
    const std::string& cmd = inv.subcommand;
    if (cmd == "synth-wind") cmd_synth_wind(cfg, out, log);
    else if (cmd == "ingest") cmd_ingest(cfg, out, log);
    else if (cmd == "fit") cmd_fit(cfg, out, log);
    else if (cmd == "simulate") cmd_simulate(cfg, out, log);
    else if (cmd == "equilibrium") cmd_equilibrium(cfg, out, log);
    else cmd_sweep(cfg, out, log);
    out.commit();
    for (const auto& p : out.written()) log << "wrote " << p.string() << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << "invalid parameter: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace gridshare::pipeline
