#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/time.hpp"
#include "gridshare/windmodel.hpp"

namespace gridshare::stackelberg {

/// Prices in currency/MWh, C_T as a lifetime total.
struct CostParams {
  double p_g = 74.3;
  double p_t = 0.0;
  double c_g1 = 0.0;
  double c_g2 = 0.0;
  double c_t = 0.0;

  /// p_t, c_g1 and c_g2 given as fractions of p_g.
  static CostParams from_fractions(double p_g, double p_t_frac, double c_g1_frac,
                                   double c_g2_frac, double c_t);
  void validate() const;
};

/// Lifetime energies (MWh): potential generation and curtailment per player.
struct EnergyQuadruple {
  double e_g1 = 0.0;
  double e_g2 = 0.0;
  double e_c1 = 0.0;
  double e_c2 = 0.0;

  void validate() const;
};

/// Line investor: own sales plus transmission fees, minus line cost.
double profit_leader(const EnergyQuadruple& e, const CostParams& c);
/// Local generators: sales net of fees, minus generation cost.
double profit_follower(const EnergyQuadruple& e, const CostParams& c);

/// Capacities {0, step, 2 step, ..., max}.
struct StrategyGrid {
  double max_mw = 415.0;
  double step_mw = 0.5;

  void validate() const;
  std::size_t size() const;
  double at(std::size_t i) const { return static_cast<double>(i) * step_mw; }
  std::vector<double> points() const;
};

/// Splits total curtailment in proportion to potential generation.
std::pair<double, double> fair_share_energy(double e_g1, double e_g2, double e_c_total);

/// Replays aligned normalized series against per-interval demand, splitting
/// each interval's excess in proportion to the players' outputs.
EnergyQuadruple empirical_energies(double p_n1, double p_n2, std::span<const double> x1,
                                   std::span<const double> x2, std::span<const double> demand);

/// E[(c + A U + B V)+] for independent U, V ~ Uniform(0, 1), A, B >= 0.
double expected_excess_uniform_box(double c, double a, double b);

/// Single player, no curtailment: P_N E[x].
double expected_generation(const windmodel::BetaParams& dist, double p_n);
/// E[(x1 P_N1 + x2 P_N2)] under the histogram density.
double expected_generation(const windmodel::JointPowerDistribution& dist, double p_n1,
                           double p_n2);

/// Single player: E[(x P_N - D)+].
double expected_curtailment(const windmodel::BetaParams& dist, double p_n, double demand_mw);
/// Two independent Beta players: E[(x1 P_N1 + x2 P_N2 - D)+].
double expected_curtailment(const windmodel::BetaParams& d1, const windmodel::BetaParams& d2,
                            double p_n1, double p_n2, double demand_mw);
/// Histogram density, exact per cell.
double expected_curtailment(const windmodel::JointPowerDistribution& dist, double p_n1,
                            double p_n2, double demand_mw);

/// Source of the energy quadruple for any capacity pair.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;
  virtual EnergyQuadruple energies(double p_n1, double p_n2) const = 0;
};

/// Exact: full replay of the aligned series. `lifetime_hours` > 0 rescales
/// totals to that many hours.
class ReplayEnergyModel final : public EnergyModel {
 public:
  ReplayEnergyModel(std::vector<double> x1, std::vector<double> x2, std::vector<double> demand,
                    double lifetime_hours = 0.0);
  EnergyQuadruple energies(double p_n1, double p_n2) const override;
  std::size_t intervals() const { return demand_.size(); }

 private:
  std::vector<double> x1_, x2_, demand_;
  double scale_ = 1.0;
};

/// One hour-season class: its joint histogram, demand and weight in hours.
struct EnergyBin {
  windmodel::JointPowerDistribution dist;
  double demand_mw = 0.0;
  double weight_hours = 0.0;
};

/// Aggregated: weighted sums over per-bin histograms. Each cell's curtailment
/// is split in proportion to the players' outputs at the cell mean.
class BinnedEnergyModel final : public EnergyModel {
 public:
  explicit BinnedEnergyModel(std::vector<EnergyBin> bins, double lifetime_hours = 0.0);

  /// Bins the aligned series by hour-season class. Per-bin demand is the mean
  /// of the interval demands in that bin.
  static BinnedEnergyModel from_series(std::span<const double> x1, std::span<const double> x2,
                                       std::span<const double> demand,
                                       std::span<const Timestamp> times, std::size_t bins,
                                       double lifetime_hours = 0.0);

  EnergyQuadruple energies(double p_n1, double p_n2) const override;
  const std::vector<EnergyBin>& bins() const { return bins_; }
  double total_hours() const;

 private:
  struct Cell {
    double weight;  // probability * bin hours
    double lo1, w1, lo2, w2;
    double m1, m2;
    double demand;
  };
  std::vector<EnergyBin> bins_;
  std::vector<Cell> cells_;
  double scale_ = 1.0;
};

/// Energy quadruples for every grid pair, computed once.
class EnergySurface {
 public:
  /// `threads` = 0 uses the hardware concurrency. Output does not depend on it.
  EnergySurface(const EnergyModel& model, const StrategyGrid& grid, unsigned threads = 0);

  const StrategyGrid& grid() const { return grid_; }
  std::size_t size() const { return n_; }
  const EnergyQuadruple& at(std::size_t i1, std::size_t i2) const { return values_[i1 * n_ + i2]; }

 private:
  StrategyGrid grid_;
  std::size_t n_;
  std::vector<EnergyQuadruple> values_;
};

struct ResponsePoint {
  double p_n1 = 0.0;
  double p_n2_star = 0.0;
  double profit2 = 0.0;
};

struct EquilibriumResult {
  double p_n1_star = 0.0;
  double p_n2_star = 0.0;
  std::size_t i1_star = 0;
  std::size_t i2_star = 0;
  double profit1 = 0.0;
  double profit2 = 0.0;
  EnergyQuadruple energies;
  std::vector<ResponsePoint> follower_response_curve;
  bool viable1 = false;  ///< profit1 >= 0
  bool viable2 = false;  ///< profit2 >= 0
};

/// Grid index of the follower's best response to leader index `i1`; ties go
/// to the smallest capacity.
std::size_t follower_best_response(const EnergySurface& surface, const CostParams& c,
                                   std::size_t i1);

/// Backward induction over the grid.
EquilibriumResult solve_equilibrium(const EnergySurface& surface, const CostParams& c);
EquilibriumResult solve_equilibrium(const EnergyModel& model, const StrategyGrid& grid,
                                    const CostParams& c);

enum class SweepParam { c_g1, c_g2, p_t };
std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view name);

/// Values from, from + step, ... up to `to` inclusive, in currency/MWh.
struct SweepSpec {
  std::string scenario_id;
  SweepParam param = SweepParam::c_g2;
  double from = 0.0;
  double to = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
};

/// Base costs plus the sweep of one of the three reference scenarios (1-3),
/// stepping by 0.02 p_G.
std::pair<CostParams, SweepSpec> scenario_preset(int scenario, double p_g = 74.3,
                                                 double c_t = 230e6);

struct SweepRow {
  std::string scenario_id;
  SweepParam param = SweepParam::c_g2;
  double value = 0.0;
  EquilibriumResult result;
};

CostParams with_param(CostParams c, SweepParam p, double value);

std::vector<SweepRow> scenario_sweep(const EnergySurface& surface, const CostParams& base,
                                     const SweepSpec& spec);

/// scenario_id,varied_param,value,p_n1_star,p_n2_star,profit1,profit2,
/// e_g1,e_g2,e_c1,e_c2,viable1,viable2
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows,
                     const csv::Provenance& provenance = {});
/// p_n1,p_n2_star,profit2
void write_response_csv(std::ostream& out, const EquilibriumResult& result,
                        const csv::Provenance& provenance = {});

}  // namespace gridshare::stackelberg
