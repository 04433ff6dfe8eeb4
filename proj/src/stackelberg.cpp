#include "gridshare/stackelberg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "gridshare/errors.hpp"

namespace gridshare::stackelberg {

namespace {

void require_finite_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
  }
}

void check_capacities(double p_n1, double p_n2) {
  require_finite_nonneg(p_n1, "p_n1");
  require_finite_nonneg(p_n2, "p_n2");
}

// E[(x - s)+] for x ~ Beta(alpha, beta), closed form through partial moments.
double beta_excess(const windmodel::BetaParams& d, double s) {
  if (s <= 0.0) return d.mean() - s;
  if (s >= 1.0) return 0.0;
  const double upper_mean = d.mean() * boost::math::ibetac(d.alpha + 1.0, d.beta, s);
  const double upper_prob = boost::math::ibetac(d.alpha, d.beta, s);
  return std::max(0.0, upper_mean - s * upper_prob);
}

template <class F>
double integrate_unit(F&& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, lo, hi);
}

}  // namespace

CostParams CostParams::from_fractions(double p_g, double p_t_frac, double c_g1_frac,
                                      double c_g2_frac, double c_t) {
  CostParams c{p_g, p_t_frac * p_g, c_g1_frac * p_g, c_g2_frac * p_g, c_t};
  c.validate();
  return c;
}

void CostParams::validate() const {
  if (!std::isfinite(p_g) || !(p_g > 0.0)) throw std::invalid_argument("p_g must be > 0");
  require_finite_nonneg(p_t, "p_t");
  require_finite_nonneg(c_g1, "c_g1");
  require_finite_nonneg(c_g2, "c_g2");
  require_finite_nonneg(c_t, "c_t");
}

void EnergyQuadruple::validate() const {
  require_finite_nonneg(e_g1, "e_g1");
  require_finite_nonneg(e_g2, "e_g2");
  require_finite_nonneg(e_c1, "e_c1");
  require_finite_nonneg(e_c2, "e_c2");
  const double tol = 1e-9;
  if (e_c1 > e_g1 * (1.0 + tol) + tol || e_c2 > e_g2 * (1.0 + tol) + tol) {
    throw std::invalid_argument("curtailed energy exceeds potential generation");
  }
}

double profit_leader(const EnergyQuadruple& e, const CostParams& c) {
  return (e.e_g1 - e.e_c1) * c.p_g - e.e_g1 * c.c_g1 + (e.e_g2 - e.e_c2) * c.p_t - c.c_t;
}

double profit_follower(const EnergyQuadruple& e, const CostParams& c) {
  return (e.e_g2 - e.e_c2) * (c.p_g - c.p_t) - e.e_g2 * c.c_g2;
}

void StrategyGrid::validate() const {
  if (!std::isfinite(step_mw) || !(step_mw > 0.0)) {
    throw std::invalid_argument("grid step_mw must be > 0");
  }
  if (!std::isfinite(max_mw) || max_mw < step_mw) {
    throw std::invalid_argument("grid max_mw must be >= step_mw");
  }
}

std::size_t StrategyGrid::size() const {
  validate();
  return static_cast<std::size_t>(std::floor(max_mw / step_mw + 1e-9)) + 1;
}

std::vector<double> StrategyGrid::points() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
  return out;
}

std::pair<double, double> fair_share_energy(double e_g1, double e_g2, double e_c_total) {
  require_finite_nonneg(e_g1, "e_g1");
  require_finite_nonneg(e_g2, "e_g2");
  require_finite_nonneg(e_c_total, "e_c_total");
  if (e_c_total == 0.0) return {0.0, 0.0};
  const double total = e_g1 + e_g2;
  if (!(total > 0.0)) {
    throw std::invalid_argument("curtailment without any potential generation");
  }
  return {e_g1 / total * e_c_total, e_g2 / total * e_c_total};
}

EnergyQuadruple empirical_energies(double p_n1, double p_n2, std::span<const double> x1,
                                   std::span<const double> x2, std::span<const double> demand) {
  check_capacities(p_n1, p_n2);
  if (x1.size() != x2.size() || x1.size() != demand.size()) {
    throw DataError("empirical energies: series lengths differ (" + std::to_string(x1.size()) +
                    ", " + std::to_string(x2.size()) + ", " + std::to_string(demand.size()) + ")");
  }
  EnergyQuadruple e;
  for (std::size_t t = 0; t < demand.size(); ++t) {
    const double o1 = x1[t] * p_n1;
    const double o2 = x2[t] * p_n2;
    const double total = o1 + o2;
    e.e_g1 += o1;
    e.e_g2 += o2;
    const double excess = total - demand[t];
    if (excess > 0.0) {
      e.e_c1 += excess * (o1 / total);
      e.e_c2 += excess * (o2 / total);
    }
  }
  return e;
}

double expected_excess_uniform_box(double c, double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("box widths must be >= 0");
  if (a < b) std::swap(a, b);
  const double t = -c;
  if (t <= 0.0) return 0.5 * (a + b) - t;
  if (t >= a + b) return 0.0;
  if (b == 0.0) {
    // t < a here, so a > 0.
    const double u = a - t;
    return u * u / (2.0 * a);
  }
  if (t < b) return 0.5 * (a + b) - t + t * t * t / (6.0 * a * b);
  if (t > a) {
    const double u = a + b - t;
    return u * u * u / (6.0 * a * b);
  }
  const double r = a - t;
  return (r * r + r * b + b * b / 3.0) / (2.0 * a);
}

double expected_generation(const windmodel::BetaParams& dist, double p_n) {
  dist.validate();
  require_finite_nonneg(p_n, "p_n");
  if (p_n == 0.0) return 0.0;
  return p_n * integrate_unit([&](double x) { return x * dist.pdf(x); }, 0.0, 1.0);
}

double expected_generation(const windmodel::JointPowerDistribution& dist, double p_n1,
                           double p_n2) {
  check_capacities(p_n1, p_n2);
  double total = 0.0;
  for (const auto& cell : dist.cells()) {
    if (cell.probability > 0.0) {
      total += cell.probability * (cell.mean_x1 * p_n1 + cell.mean_x2 * p_n2);
    }
  }
  return total;
}

double expected_curtailment(const windmodel::BetaParams& dist, double p_n, double demand_mw) {
  dist.validate();
  require_finite_nonneg(p_n, "p_n");
  require_finite_nonneg(demand_mw, "demand");
  if (p_n <= demand_mw) return 0.0;
  const double s = demand_mw / p_n;
  return integrate_unit([&](double x) { return (x * p_n - demand_mw) * dist.pdf(x); }, s, 1.0);
}

double expected_curtailment(const windmodel::BetaParams& d1, const windmodel::BetaParams& d2,
                            double p_n1, double p_n2, double demand_mw) {
  d1.validate();
  d2.validate();
  check_capacities(p_n1, p_n2);
  require_finite_nonneg(demand_mw, "demand");
  if (p_n1 + p_n2 <= demand_mw) return 0.0;
  if (p_n2 == 0.0) return expected_curtailment(d1, p_n1, demand_mw);
  if (p_n1 == 0.0) return expected_curtailment(d2, p_n2, demand_mw);
  // Conditional on x1 the excess is P_N2 E[(x2 - s)+], s = (D - x1 P_N1) / P_N2.
  const auto inner = [&](double x1) {
    return d1.pdf(x1) * p_n2 * beta_excess(d2, (demand_mw - x1 * p_n1) / p_n2);
  };
  // Integrate piecewise between the kinks of the inner expectation.
  std::vector<double> cuts{0.0, 1.0};
  for (double k : {(demand_mw - p_n2) / p_n1, demand_mw / p_n1}) {
    if (k > 0.0 && k < 1.0) cuts.push_back(k);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate_unit(inner, cuts[i], cuts[i + 1]);
  return total;
}

double expected_curtailment(const windmodel::JointPowerDistribution& dist, double p_n1,
                            double p_n2, double demand_mw) {
  check_capacities(p_n1, p_n2);
  require_finite_nonneg(demand_mw, "demand");
  double total = 0.0;
  for (std::size_t i1 = 0; i1 < dist.bin_count(); ++i1) {
    for (std::size_t i2 = 0; i2 < dist.bin_count(); ++i2) {
      const auto& cell = dist.cell(i1, i2);
      if (!(cell.probability > 0.0)) continue;
      const auto box = dist.support(i1, i2);
      const double c = box.x1_lo * p_n1 + box.x2_lo * p_n2 - demand_mw;
      total += cell.probability * expected_excess_uniform_box(
                                      c, (box.x1_hi - box.x1_lo) * p_n1,
                                      (box.x2_hi - box.x2_lo) * p_n2);
    }
  }
  return total;
}

ReplayEnergyModel::ReplayEnergyModel(std::vector<double> x1, std::vector<double> x2,
                                     std::vector<double> demand, double lifetime_hours)
    : x1_(std::move(x1)), x2_(std::move(x2)), demand_(std::move(demand)) {
  if (x1_.size() != x2_.size() || x1_.size() != demand_.size()) {
    throw DataError("replay model: series lengths differ");
  }
  if (demand_.empty()) throw DataError("replay model: no intervals");
  require_finite_nonneg(lifetime_hours, "lifetime_hours");
  if (lifetime_hours > 0.0) scale_ = lifetime_hours / static_cast<double>(demand_.size());
}

EnergyQuadruple ReplayEnergyModel::energies(double p_n1, double p_n2) const {
  EnergyQuadruple e = empirical_energies(p_n1, p_n2, x1_, x2_, demand_);
  if (scale_ != 1.0) {
    e.e_g1 *= scale_;
    e.e_g2 *= scale_;
    e.e_c1 *= scale_;
    e.e_c2 *= scale_;
  }
  return e;
}

BinnedEnergyModel::BinnedEnergyModel(std::vector<EnergyBin> bins, double lifetime_hours)
    : bins_(std::move(bins)) {
  require_finite_nonneg(lifetime_hours, "lifetime_hours");
  for (const auto& bin : bins_) {
    require_finite_nonneg(bin.demand_mw, "bin demand");
    require_finite_nonneg(bin.weight_hours, "bin weight");
    if (bin.weight_hours == 0.0) continue;
    const std::size_t n = bin.dist.bin_count();
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      for (std::size_t i2 = 0; i2 < n; ++i2) {
        const auto& cell = bin.dist.cell(i1, i2);
        if (!(cell.probability > 0.0)) continue;
        const auto box = bin.dist.support(i1, i2);
        cells_.push_back({cell.probability * bin.weight_hours, box.x1_lo, box.x1_hi - box.x1_lo,
                          box.x2_lo, box.x2_hi - box.x2_lo, cell.mean_x1, cell.mean_x2,
                          bin.demand_mw});
      }
    }
  }
  const double hours = total_hours();
  if (!(hours > 0.0)) throw DataError("binned model: no weighted bins");
  if (lifetime_hours > 0.0) scale_ = lifetime_hours / hours;
}

double BinnedEnergyModel::total_hours() const {
  double total = 0.0;
  for (const auto& bin : bins_) total += bin.weight_hours;
  return total;
}

BinnedEnergyModel BinnedEnergyModel::from_series(std::span<const double> x1,
                                                 std::span<const double> x2,
                                                 std::span<const double> demand,
                                                 std::span<const Timestamp> times,
                                                 std::size_t bins, double lifetime_hours) {
  if (x1.size() != x2.size() || x1.size() != demand.size() || x1.size() != times.size()) {
    throw DataError("binned model: series lengths differ");
  }
  std::vector<std::vector<double>> a(kHourSeasonBins), b(kHourSeasonBins);
  std::vector<double> demand_sum(kHourSeasonBins, 0.0);
  for (std::size_t t = 0; t < times.size(); ++t) {
    const std::size_t k = HourSeasonKey::from_time(times[t]).index();
    a[k].push_back(x1[t]);
    b[k].push_back(x2[t]);
    demand_sum[k] += demand[t];
  }
  std::vector<EnergyBin> out;
  for (std::size_t k = 0; k < static_cast<std::size_t>(kHourSeasonBins); ++k) {
    if (a[k].empty()) continue;
    const auto key = HourSeasonKey::from_index(k);
    const double n = static_cast<double>(a[k].size());
    out.push_back({windmodel::joint_histogram(a[k], b[k], key, bins), demand_sum[k] / n, n});
  }
  return BinnedEnergyModel(std::move(out), lifetime_hours);
}

EnergyQuadruple BinnedEnergyModel::energies(double p_n1, double p_n2) const {
  check_capacities(p_n1, p_n2);
  const double share_default = p_n1 + p_n2 > 0.0 ? p_n1 / (p_n1 + p_n2) : 0.5;
  EnergyQuadruple e;
  for (const Cell& cell : cells_) {
    const double o1 = cell.m1 * p_n1;
    const double o2 = cell.m2 * p_n2;
    e.e_g1 += cell.weight * o1;
    e.e_g2 += cell.weight * o2;
    const double c = cell.lo1 * p_n1 + cell.lo2 * p_n2 - cell.demand;
    const double excess = expected_excess_uniform_box(c, cell.w1 * p_n1, cell.w2 * p_n2);
    if (excess > 0.0) {
      const double share1 = o1 + o2 > 0.0 ? o1 / (o1 + o2) : share_default;
      const double curtailed = cell.weight * excess;
      e.e_c1 += curtailed * share1;
      e.e_c2 += curtailed * (1.0 - share1);
    }
  }
  e.e_g1 *= scale_;
  e.e_g2 *= scale_;
  e.e_c1 = std::min(e.e_c1 * scale_, e.e_g1);
  e.e_c2 = std::min(e.e_c2 * scale_, e.e_g2);
  return e;
}

EnergySurface::EnergySurface(const EnergyModel& model, const StrategyGrid& grid,
                             unsigned threads)
    : grid_(grid), n_(grid.size()), values_(n_ * n_) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_));
  std::atomic<std::size_t> next_row{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      for (std::size_t i1 = next_row++; i1 < n_ && !failed; i1 = next_row++) {
        for (std::size_t i2 = 0; i2 < n_; ++i2) {
          values_[i1 * n_ + i2] = model.energies(grid_.at(i1), grid_.at(i2));
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::size_t follower_best_response(const EnergySurface& surface, const CostParams& c,
                                   std::size_t i1) {
  if (i1 >= surface.size()) throw std::invalid_argument("leader index off the grid");
  std::size_t best = 0;
  double best_profit = profit_follower(surface.at(i1, 0), c);
  for (std::size_t i2 = 1; i2 < surface.size(); ++i2) {
    const double p = profit_follower(surface.at(i1, i2), c);
    if (p > best_profit) {
      best_profit = p;
      best = i2;
    }
  }
  return best;
}

EquilibriumResult solve_equilibrium(const EnergySurface& surface, const CostParams& c) {
  c.validate();
  EquilibriumResult r;
  const auto& grid = surface.grid();
  r.follower_response_curve.reserve(surface.size());
  double best_leader = 0.0;
  for (std::size_t i1 = 0; i1 < surface.size(); ++i1) {
    const std::size_t i2 = follower_best_response(surface, c, i1);
    const EnergyQuadruple& e = surface.at(i1, i2);
    r.follower_response_curve.push_back({grid.at(i1), grid.at(i2), profit_follower(e, c)});
    const double leader = profit_leader(e, c);
    if (i1 == 0 || leader > best_leader) {
      best_leader = leader;
      r.i1_star = i1;
      r.i2_star = i2;
    }
  }
  r.p_n1_star = grid.at(r.i1_star);
  r.p_n2_star = grid.at(r.i2_star);
  r.energies = surface.at(r.i1_star, r.i2_star);
  r.profit1 = profit_leader(r.energies, c);
  r.profit2 = profit_follower(r.energies, c);
  r.viable1 = r.profit1 >= 0.0;
  r.viable2 = r.profit2 >= 0.0;
  return r;
}

EquilibriumResult solve_equilibrium(const EnergyModel& model, const StrategyGrid& grid,
                                    const CostParams& c) {
  return solve_equilibrium(EnergySurface(model, grid), c);
}

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::c_g1: return "c_g1";
    case SweepParam::c_g2: return "c_g2";
    case SweepParam::p_t: return "p_t";
  }
  return "unknown";
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "c_g1") return SweepParam::c_g1;
  if (name == "c_g2") return SweepParam::c_g2;
  if (name == "p_t") return SweepParam::p_t;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) +
                              "' (expected c_g1, c_g2 or p_t)");
}

std::vector<double> SweepSpec::values() const {
  if (!std::isfinite(from) || !std::isfinite(to) || !std::isfinite(step) || !(step > 0.0)) {
    throw std::invalid_argument("sweep needs finite bounds and step > 0");
  }
  std::vector<double> out;
  if (from > to) return out;
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(from + static_cast<double>(k) * step);
  return out;
}

std::pair<CostParams, SweepSpec> scenario_preset(int scenario, double p_g, double c_t) {
  const double step = 0.02 * p_g;
  switch (scenario) {
    case 1:
      return {CostParams::from_fractions(p_g, 0.26, 0.30, 0.06, c_t),
              {"S1", SweepParam::c_g2, 0.06 * p_g, 0.52 * p_g, step}};
    case 2:
      return {CostParams::from_fractions(p_g, 0.26, 0.14, 0.30, c_t),
              {"S2", SweepParam::c_g1, 0.14 * p_g, 0.50 * p_g, step}};
    case 3:
      return {CostParams::from_fractions(p_g, 0.0, 0.26, 0.20, c_t),
              {"S3", SweepParam::p_t, 0.0, 0.76 * p_g, step}};
    default:
      throw std::invalid_argument("scenario must be 1, 2 or 3");
  }
}

CostParams with_param(CostParams c, SweepParam p, double value) {
  switch (p) {
    case SweepParam::c_g1: c.c_g1 = value; break;
    case SweepParam::c_g2: c.c_g2 = value; break;
    case SweepParam::p_t: c.p_t = value; break;
  }
  c.validate();
  return c;
}

std::vector<SweepRow> scenario_sweep(const EnergySurface& surface, const CostParams& base,
                                     const SweepSpec& spec) {
  std::vector<SweepRow> rows;
  for (double v : spec.values()) {
    rows.push_back({spec.scenario_id, spec.param, v,
                    solve_equilibrium(surface, with_param(base, spec.param, v))});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows,
                     const csv::Provenance& provenance) {
  using csv::format_double;
  csv::write_provenance(out, provenance);
  out << "scenario_id,varied_param,value,p_n1_star,p_n2_star,profit1,profit2,"
         "e_g1,e_g2,e_c1,e_c2,viable1,viable2\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    csv::write_row(out, {row.scenario_id, std::string(to_string(row.param)),
                         format_double(row.value), format_double(r.p_n1_star),
                         format_double(r.p_n2_star), format_double(r.profit1),
                         format_double(r.profit2), format_double(r.energies.e_g1),
                         format_double(r.energies.e_g2), format_double(r.energies.e_c1),
                         format_double(r.energies.e_c2), r.viable1 ? "1" : "0",
                         r.viable2 ? "1" : "0"});
  }
}

void write_response_csv(std::ostream& out, const EquilibriumResult& result,
                        const csv::Provenance& provenance) {
  csv::write_provenance(out, provenance);
  out << "p_n1,p_n2_star,profit2\n";
  for (const auto& p : result.follower_response_curve) {
    csv::write_row(out, {csv::format_double(p.p_n1), csv::format_double(p.p_n2_star),
                         csv::format_double(p.profit2)});
  }
}

}  // namespace gridshare::stackelberg
