#include "gridshare/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gridshare/errors.hpp"

namespace gridshare::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  const std::string& str(const std::string& key) const {
    auto it = raw_.values.find(key);
    if (it != raw_.values.end()) return it->second;
    return defaults().at(key);
  }

  double num(const std::string& key) const {
    const std::string s = str(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(key + ": '" + s + "' is not a number");
    }
    return v;
  }

  double positive(const std::string& key) const {
    const double v = num(key);
    if (!(v > 0.0)) throw ConfigError(key + ": must be > 0");
    return v;
  }

  double nonneg(const std::string& key) const {
    const double v = num(key);
    if (v < 0.0) throw ConfigError(key + ": must be >= 0");
    return v;
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string s = str(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError(key + ": '" + s + "' is not a non-negative integer");
    }
    return v;
  }

  bool flag(const std::string& key) const {
    const std::string s = str(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": '" + s + "' is not a boolean");
  }

  std::filesystem::path path(const std::string& key) const {
    const std::string s = str(key);
    if (s.empty()) return {};
    std::filesystem::path p(s);
    if (p.is_relative()) p = raw_.base_dir / p;
    if (!std::filesystem::exists(p)) throw ConfigError(key + ": file not found: " + p.string());
    return p;
  }

  template <class T>
  T choice(const std::string& key, std::initializer_list<std::pair<const char*, T>> options) const {
    const std::string& s = str(key);
    std::string names;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      names += (names.empty() ? "" : ", ") + std::string(name);
    }
    throw ConfigError(key + ": '" + s + "' is not one of " + names);
  }

 private:
  const RawConfig& raw_;
};

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> table{
      {"run.seed", "1"},
      {"run.out_dir", "out"},
      {"run.bins", "20"},
      {"wind.mode", "synthetic"},
      {"wind.weibull_c", "9"},
      {"wind.weibull_k", "1.8"},
      {"wind.hours", "8760"},
      {"wind.start", "2015-01-01T00:00Z"},
      {"wind.correlation", "0.5"},
      {"wind.leader_csv", ""},
      {"wind.follower_csv", ""},
      {"wind.anemometer_height", "10"},
      {"wind.hub_height", "85"},
      {"wind.roughness", "0.03"},
      {"turbine.shape", "cubic"},
      {"turbine.rated_mw", "2.05"},
      {"turbine.cut_in", "3"},
      {"turbine.rated_speed", "13"},
      {"turbine.cut_out", "28"},
      {"turbine.sigmoid_a", "0.3921"},
      {"turbine.sigmoid_b", "16.4287"},
      {"fleet.generators", "G1:7, G2:2, G3:3"},
      {"fleet.rota_order", ""},
      {"fleet.sources", ""},
      {"simulate.rules", "lifo, rota, pro_rata, frr"},
      {"simulate.correlations", "0, 0.25, 0.5, 0.75, 1"},
      {"simulate.write_timeline", "false"},
      {"demand.mode", "constant"},
      {"demand.constant_mw", "6"},
      {"demand.csv", ""},
      {"demand.profile_csv", ""},
      {"demand.line_capacity_mw", "150"},
      {"costs.units", "fraction"},
      {"costs.p_g", "74.3"},
      {"costs.p_t", "0.26"},
      {"costs.c_g1", "0.30"},
      {"costs.c_g2", "0.30"},
      {"costs.c_t", "230e6"},
      {"grid.max_mw", "415"},
      {"grid.step_mw", "0.5"},
      {"grid.mode", "binned"},
      {"grid.lifetime_hours", "145077"},
      {"sweep.scenario", "1"},
      {"sweep.vary", "c_g2"},
      {"sweep.from", "0.06"},
      {"sweep.to", "0.52"},
      {"sweep.step", "0.02"},
  };
  return table;
}

RawConfig RawConfig::parse(const std::string& text, std::filesystem::path base_dir) {
  RawConfig raw;
  raw.base_dir = std::move(base_dir);
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section + ": keys must live inside a [section]");
    for (const auto& [key, value] : body) raw.set(section + "." + key, trim(value.data()));
  }
  for (const auto& [key, value] : raw.values) {
    if (!defaults().contains(key)) throw ConfigError(key + ": unknown key");
  }
  return raw;
}

RawConfig RawConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

void RawConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  const std::string key = trim(assignment.substr(0, eq));
  if (!defaults().contains(key)) throw ConfigError(key + ": unknown key");
  values[key] = trim(assignment.substr(eq + 1));
}

std::string RawConfig::hash() const {
  std::string canonical;
  for (const auto& [key, value] : values) {
    if (key == "run.out_dir") continue;
    canonical += key + "=" + value + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

curtailment::Fleet RunConfig::fleet() const { return curtailment::Fleet(generators, rotation); }

RunConfig resolve(const RawConfig& raw) {
  const Reader r(raw);
  RunConfig c;
  c.hash = raw.hash();

  c.seed = r.u64("run.seed");
  c.out_dir = r.str("run.out_dir");
  c.bins = r.u64("run.bins");
  if (c.bins < 2) throw ConfigError("run.bins: must be >= 2");

  c.wind_mode = r.choice<WindMode>("wind.mode", {{"synthetic", WindMode::synthetic},
                                                 {"csv", WindMode::csv}});
  c.weibull = {r.positive("wind.weibull_c"), r.positive("wind.weibull_k")};
  c.hours = r.u64("wind.hours");
  if (c.hours == 0) throw ConfigError("wind.hours: must be >= 1");
  try {
    c.start = parse_timestamp(r.str("wind.start"));
  } catch (const DataError& e) {
    throw ConfigError(std::string("wind.start: ") + e.what());
  }
  c.correlation = r.num("wind.correlation");
  if (c.correlation < 0.0 || c.correlation > 1.0) {
    throw ConfigError("wind.correlation: must lie in [0, 1]");
  }
  c.leader_csv = r.path("wind.leader_csv");
  c.follower_csv = r.path("wind.follower_csv");
  if (c.wind_mode == WindMode::csv && (c.leader_csv.empty() || c.follower_csv.empty())) {
    throw ConfigError("wind.leader_csv: csv mode needs wind.leader_csv and wind.follower_csv");
  }
  c.anemometer_height = r.positive("wind.anemometer_height");
  c.hub_height = r.positive("wind.hub_height");
  c.roughness = r.positive("wind.roughness");
  if (c.roughness >= c.anemometer_height) {
    throw ConfigError("wind.roughness: must be below wind.anemometer_height");
  }

  auto& t = c.turbine;
  t.shape = r.choice<windmodel::CurveShape>(
      "turbine.shape", {{"cubic", windmodel::CurveShape::cubic},
                        {"sigmoid", windmodel::CurveShape::sigmoid}});
  t.rated_mw = r.positive("turbine.rated_mw");
  t.cut_in = r.nonneg("turbine.cut_in");
  t.rated_speed = r.positive("turbine.rated_speed");
  t.cut_out = r.positive("turbine.cut_out");
  t.sigmoid_a = r.positive("turbine.sigmoid_a");
  t.sigmoid_b = r.num("turbine.sigmoid_b");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("turbine: ") + e.what());
  }

  int order = 0;
  for (const auto& item : split_list(r.str("fleet.generators"))) {
    curtailment::GeneratorSpec g;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("fleet.generators: '" + item + "' must look like ID:MW");
    }
    g.id = trim(item.substr(0, colon));
    const std::string mw = trim(item.substr(colon + 1));
    auto [ptr, ec] = std::from_chars(mw.data(), mw.data() + mw.size(), g.rated_mw);
    if (g.id.empty() || ec != std::errc{} || ptr != mw.data() + mw.size() || !(g.rated_mw > 0.0)) {
      throw ConfigError("fleet.generators: '" + item + "' needs an id and a rating > 0");
    }
    g.connection_order = ++order;
    g.wind_source = "leader";
    c.generators.push_back(std::move(g));
  }
  if (c.generators.empty()) throw ConfigError("fleet.generators: empty fleet");
  const auto sources = split_list(r.str("fleet.sources"));
  if (!sources.empty()) {
    if (sources.size() != c.generators.size()) {
      throw ConfigError("fleet.sources: need one source per generator");
    }
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (sources[i] != "leader" && sources[i] != "follower") {
        throw ConfigError("fleet.sources: '" + sources[i] + "' is not leader or follower");
      }
      c.generators[i].wind_source = sources[i];
    }
  }
  for (const auto& id : split_list(r.str("fleet.rota_order"))) {
    std::size_t idx = 0;
    while (idx < c.generators.size() && c.generators[idx].id != id) ++idx;
    if (idx == c.generators.size()) throw ConfigError("fleet.rota_order: unknown generator " + id);
    c.rotation.push_back(idx);
  }
  try {
    (void)c.fleet();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("fleet: ") + e.what());
  }

  for (const auto& name : split_list(r.str("simulate.rules"))) {
    try {
      c.rules.push_back(curtailment::parse_rule(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("simulate.rules: ") + e.what());
    }
  }
  if (c.rules.empty()) throw ConfigError("simulate.rules: no rules");
  for (const auto& v : split_list(r.str("simulate.correlations"))) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size() || x < 0.0 || x > 1.0) {
      throw ConfigError("simulate.correlations: '" + v + "' is not in [0, 1]");
    }
    c.correlations.push_back(x);
  }
  if (c.correlations.empty()) throw ConfigError("simulate.correlations: empty");
  c.write_timeline = r.flag("simulate.write_timeline");

  c.demand_mode = r.choice<DemandMode>(
      "demand.mode", {{"constant", DemandMode::constant},
                      {"csv", DemandMode::csv},
                      {"profile", DemandMode::profile},
                      {"synthetic", DemandMode::synthetic}});
  c.constant_mw = r.nonneg("demand.constant_mw");
  c.demand_csv = r.path("demand.csv");
  c.profile_csv = r.path("demand.profile_csv");
  if (c.demand_mode == DemandMode::csv && c.demand_csv.empty()) {
    throw ConfigError("demand.csv: required when demand.mode = csv");
  }
  if (c.demand_mode == DemandMode::profile && c.profile_csv.empty()) {
    throw ConfigError("demand.profile_csv: required when demand.mode = profile");
  }
  c.line_capacity_mw = r.positive("demand.line_capacity_mw");

  const bool fractions = r.choice<bool>("costs.units", {{"fraction", true}, {"absolute", false}});
  const double p_g = r.positive("costs.p_g");
  const double unit = fractions ? p_g : 1.0;
  c.costs = {p_g, r.nonneg("costs.p_t") * unit, r.nonneg("costs.c_g1") * unit,
             r.nonneg("costs.c_g2") * unit, r.nonneg("costs.c_t")};

  c.grid = {r.positive("grid.max_mw"), r.positive("grid.step_mw")};
  if (c.grid.max_mw < c.grid.step_mw) throw ConfigError("grid.max_mw: must be >= grid.step_mw");
  c.energy_mode = r.choice<EnergyMode>("grid.mode", {{"binned", EnergyMode::binned},
                                                     {"replay", EnergyMode::replay}});
  c.lifetime_hours = r.nonneg("grid.lifetime_hours");

  const std::string scenario = r.str("sweep.scenario");
  if (scenario == "custom") {
    c.sweep_kind = SweepKind::custom;
    c.scenario = 0;
    c.sweep_base = c.costs;
    try {
      c.sweep.param = stackelberg::parse_sweep_param(r.str("sweep.vary"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("sweep.vary: ") + e.what());
    }
    c.sweep.scenario_id = "custom";
    c.sweep.from = r.nonneg("sweep.from") * unit;
    c.sweep.to = r.nonneg("sweep.to") * unit;
    c.sweep.step = r.positive("sweep.step") * unit;
  } else if (scenario == "1" || scenario == "2" || scenario == "3") {
    c.sweep_kind = SweepKind::preset;
    c.scenario = scenario[0] - '0';
    std::tie(c.sweep_base, c.sweep) = stackelberg::scenario_preset(c.scenario, p_g, c.costs.c_t);
  } else {
    throw ConfigError("sweep.scenario: '" + scenario + "' is not 1, 2, 3 or custom");
  }
  return c;
}

}  // namespace gridshare::config
