#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include "gridshare/config.hpp"
#include "gridshare/pipeline.hpp"
#include "gridshare/plot_data.hpp"

using namespace gridshare;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gridshare_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string log;
  std::string err;
};

Outcome run(const std::string& sub, const fs::path& out, std::vector<std::string> sets,
            std::optional<std::uint64_t> seed = std::nullopt) {
  pipeline::Invocation inv;
  inv.subcommand = sub;
  inv.out = out;
  inv.overrides = std::move(sets);
  inv.seed = seed;
  std::ostringstream log, err;
  const int code = pipeline::run(inv, log, err);
  return {code, log.str(), err.str()};
}

const std::vector<std::string> kSmallSim = {"wind.hours=600", "simulate.correlations=0, 1"};
const std::vector<std::string> kSmallGame = {"wind.hours=3000", "grid.max_mw=40",
                                             "grid.step_mw=4", "demand.mode=synthetic",
                                             "demand.line_capacity_mw=30"};

}  // namespace

TEST_CASE("config parsing and resolution") {
  const auto raw = config::RawConfig::parse(
      "# comment\n[run]\nseed = 5\n; other comment\n[costs]\np_t = 0.5\n[fleet]\n"
      "generators = A:4, B:1\nrota_order = B, A\n");
  const auto cfg = config::resolve(raw);
  CHECK(cfg.seed == 5);
  CHECK(cfg.costs.p_t == doctest::Approx(0.5 * 74.3));
  CHECK(cfg.costs.c_t == 230e6);
  CHECK(cfg.grid.max_mw == 415.0);
  CHECK(cfg.grid.step_mw == 0.5);
  CHECK(cfg.line_capacity_mw == 150.0);
  CHECK(cfg.turbine.cut_in == 3.0);
  CHECK(cfg.turbine.cut_out == 28.0);
  CHECK(cfg.hub_height == 85.0);
  CHECK(cfg.roughness == 0.03);
  CHECK(cfg.weibull.scale_c == 9.0);
  CHECK(cfg.weibull.shape_k == 1.8);
  CHECK(cfg.sweep.step == doctest::Approx(0.02 * 74.3));
  const auto fleet = cfg.fleet();
  CHECK(fleet.size() == 2);
  CHECK(fleet.rotation() == std::vector<std::size_t>{1, 0});

  const auto absolute = config::resolve(config::RawConfig::parse("[costs]\nunits=absolute\np_t=3\n"));
  CHECK(absolute.costs.p_t == 3.0);

  const auto custom = config::resolve(config::RawConfig::parse(
      "[sweep]\nscenario=custom\nvary=p_t\nfrom=0\nto=0.1\nstep=0.05\n"));
  CHECK(custom.sweep.values().size() == 3);
  CHECK(custom.sweep.param == stackelberg::SweepParam::p_t);

  const auto s3 = config::resolve(config::RawConfig::parse("[sweep]\nscenario=3\n[costs]\nc_t=5\n"));
  CHECK(s3.sweep_base.c_t == 5.0);
  CHECK(s3.sweep_base.c_g1 == doctest::Approx(0.26 * 74.3));
}

TEST_CASE("config errors name the key") {
  auto message = [](const std::string& text) -> std::string {
    try {
      config::resolve(config::RawConfig::parse(text));
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("[run]\nsede=1\n").find("run.sede") != std::string::npos);
  CHECK(message("[grid]\nstep_mw=-1\n").find("grid.step_mw") != std::string::npos);
  CHECK(message("[wind]\ncorrelation=2\n").find("wind.correlation") != std::string::npos);
  CHECK(message("[wind]\nmode=csv\nleader_csv=/nonexistent/a.csv\n").find("wind.leader_csv") !=
        std::string::npos);
  CHECK(message("[demand]\nmode=profile\n").find("demand.profile_csv") != std::string::npos);
  CHECK(message("[fleet]\ngenerators=A\n").find("fleet.generators") != std::string::npos);
  CHECK(message("[simulate]\nrules=lifo, random\n").find("simulate.rules") != std::string::npos);
  CHECK(message("[sweep]\nscenario=7\n").find("sweep.scenario") != std::string::npos);
  CHECK(message("[costs]\nunits=percent\n").find("costs.units") != std::string::npos);
  CHECK(message("[run]\nbins=1\n").find("run.bins") != std::string::npos);
  CHECK(message("orphan=1\n") != "");

  config::RawConfig raw;
  CHECK_THROWS_AS(raw.set("no-equals"), ConfigError);
  CHECK_THROWS_AS(raw.set("run.unknown=1"), ConfigError);
}

TEST_CASE("config hash ignores the output directory only") {
  auto a = config::RawConfig::parse("[run]\nseed=3\n");
  auto b = a;
  b.set("run.out_dir=elsewhere");
  CHECK(a.hash() == b.hash());
  b.set("run.seed=4");
  CHECK(a.hash() != b.hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("unknown subcommand and bad overrides") {
  const auto dir = scratch("bad");
  CHECK(run("plot", dir, {}).code == 2);
  const auto o = run("simulate", dir, {"grid.step_mw=zero"});
  CHECK(o.code == 2);
  CHECK(o.err.find("grid.step_mw") != std::string::npos);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("simulate writes deterministic tables") {
  const auto a = scratch("sim_a"), b = scratch("sim_b");
  REQUIRE(run("simulate", a, kSmallSim).code == 0);
  REQUIRE(run("simulate", b, kSmallSim).code == 0);
  for (const char* name : {"metrics.csv", "summary.csv", "plot_cf.csv", "plot_fairness.csv",
                           "plot_events.csv"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const std::string metrics = slurp(a / "metrics.csv");
  CHECK(metrics.rfind("# generator: gridshare\n# config_hash: ", 0) == 0);
  CHECK(metrics.find("# seed: 1\n") != std::string::npos);
  CHECK(metrics.find("wind,rule,generator_id,cf,cf_uncurtailed,cf_reduction,events\n") !=
        std::string::npos);

  const auto c = scratch("sim_c");
  REQUIRE(run("simulate", c, kSmallSim, 2).code == 0);
  CHECK(slurp(c / "metrics.csv") != metrics);
  CHECK(slurp(c / "metrics.csv").find("# seed: 2\n") != std::string::npos);
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("plot data reshapes rule by generator") {
  auto raw = config::RawConfig::parse("");
  raw.set("wind.hours=300");
  raw.set("simulate.correlations=1");
  const auto runs = pipeline::run_simulation(config::resolve(raw));
  CHECK(runs.size() == 4);
  const auto cf = plot::cf_points(runs);
  CHECK(cf.size() == 12);
  CHECK(cf[0].x == "lifo");
  CHECK(plot::fairness_points(runs).size() == 4);

  std::ostringstream empty;
  plot::write_points(empty, plot::sweep_capacity_points({}, 74.3));
  CHECK(empty.str() == "# generator: gridshare\nseries_label,x,y\n");
}

TEST_CASE("equilibrium and sweep subcommands") {
  const auto dir = scratch("game");
  auto sets = kSmallGame;
  REQUIRE(run("equilibrium", dir, sets).code == 0);
  const std::string eq = slurp(dir / "equilibrium.csv");
  CHECK(eq.find("p_g,p_t,c_g1,c_g2,c_t,p_n1_star,p_n2_star") != std::string::npos);
  const std::string curve = slurp(dir / "response_curve.csv");
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 4 + 1 + 11);

  sets.push_back("sweep.scenario=3");
  const auto sweep_dir = scratch("sweep");
  REQUIRE(run("sweep", sweep_dir, sets).code == 0);
  const std::string sweep = slurp(sweep_dir / "sweep.csv");
  CHECK(sweep.find("\nS3,p_t,0,") != std::string::npos);
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 4 + 1 + 39);
  CHECK(fs::exists(sweep_dir / "plot_sweep_energy.csv"));

  sets.push_back("grid.mode=replay");
  const auto replay_dir = scratch("replay");
  CHECK(run("equilibrium", replay_dir, sets).code == 0);
  for (const auto& d : {dir, sweep_dir, replay_dir}) fs::remove_all(d);
}

TEST_CASE("synth-wind and fit") {
  const auto dir = scratch("fit");
  REQUIRE(run("synth-wind", dir, {"wind.hours=2000"}).code == 0);
  CHECK(fs::exists(dir / "wind_leader.csv"));
  CHECK(fs::exists(dir / "wind_follower.csv"));
  REQUIRE(run("fit", dir, {"wind.hours=8760"}).code == 0);
  const std::string beta = slurp(dir / "beta.csv");
  CHECK(beta.find("location,season,hour,alpha,beta,status\n") != std::string::npos);
  CHECK(slurp(dir / "weibull.csv").find("\nleader,0,0,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("failed runs leave no partial output") {
  const auto work = scratch("partial");
  fs::create_directories(work);
  {
    std::ofstream w(work / "mast.csv");
    w << "timestamp,speed_knots\n2010-01-01T00:00Z,5\n2010-01-01T01:00Z,6\n";
    std::ofstream d(work / "demand.csv");
    d << "timestamp,demand_mw\n2010-01-01T00:00Z,100\n2010-01-01T00:00Z,100\n";
  }
  const auto out = work / "out";
  const auto o = run("ingest", out,
                     {"wind.leader_csv=" + (work / "mast.csv").string(),
                      "demand.csv=" + (work / "demand.csv").string()});
  CHECK(o.code == 3);
  CHECK(o.err.find("duplicate timestamp") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  fs::create_directories(out);
  {
    std::ofstream keep(out / "keep.txt");
    keep << "x";
  }
  CHECK(run("ingest", out, {"wind.leader_csv=" + (work / "mast.csv").string(),
                            "demand.csv=" + (work / "demand.csv").string()})
            .code == 3);
  CHECK(fs::exists(out / "keep.txt"));
  CHECK_FALSE(fs::exists(out / "cleaned_mast.csv"));
  fs::remove_all(work);
}

TEST_CASE("numeric failures map to exit code 4") {
  const auto dir = scratch("numeric");
  // Too few hours for any Weibull fit.
  const auto o = run("fit", dir, {"wind.hours=20"});
  CHECK(o.code == 4);
  CHECK_FALSE(fs::exists(dir));
}
