#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/time.hpp"

namespace gridshare::curtailment {

/// Principles of Access implemented here.
enum class RuleKind { lifo, rota, pro_rata, frr };

inline constexpr RuleKind kAllRules[] = {RuleKind::lifo, RuleKind::rota, RuleKind::pro_rata,
                                         RuleKind::frr};

std::string_view to_string(RuleKind rule);
/// Accepts "lifo", "rota", "pro_rata" (or "prorata", "pro-rata") and "frr".
RuleKind parse_rule(std::string_view name);

/// Curtailment below this many MW is noise: it is not an event.
inline constexpr double kCurtailEpsilonMw = 1e-9;

struct GeneratorSpec {
  std::string id;
  double rated_mw = 0.0;
  int connection_order = 1;  ///< 1 = earliest connection
  std::string wind_source;
};

/// A validated set of generators plus the rota used by Rota and FRR.
class Fleet {
 public:
  /// `rotation` lists generator indices in turn order; empty means ascending
  /// connection order.
  explicit Fleet(std::vector<GeneratorSpec> generators, std::vector<std::size_t> rotation = {});

  std::size_t size() const { return generators_.size(); }
  const GeneratorSpec& operator[](std::size_t i) const { return generators_[i]; }
  const std::vector<GeneratorSpec>& generators() const { return generators_; }

  /// Generator indices in rota order.
  const std::vector<std::size_t>& rotation() const { return rotation_; }
  /// Generator indices, latest connection first.
  const std::vector<std::size_t>& lifo_order() const { return lifo_order_; }

  double total_rated_mw() const;

 private:
  std::vector<GeneratorSpec> generators_;
  std::vector<std::size_t> rotation_;
  std::vector<std::size_t> lifo_order_;
};

/// Position in the rota plus, for FRR, each generator's remaining MW quota.
struct RotationState {
  std::size_t pointer = 0;          ///< index into Fleet::rotation()
  std::vector<double> quotas_mw;    ///< per generator, FRR only

  static RotationState initial(const Fleet& fleet);
};

struct Allocation {
  std::vector<double> curtailed_mw;  ///< per generator, fleet order
  double total_required_mw = 0.0;

  double total() const;
};

struct RotationStep {
  Allocation allocation;
  RotationState state;
};

/// max(0, sum(outputs) - demand).
double required_curtailment(std::span<const double> outputs, double demand_mw);

/// Curtails the latest connection first, each fully, until `required` is met.
Allocation allocate_lifo(const Fleet& fleet, std::span<const double> outputs, double required);

/// Starting at the rota pointer, curtails generators fully in turn until
/// `required` is met, then moves the pointer on by exactly one generator.
RotationStep allocate_rota(const Fleet& fleet, std::span<const double> outputs, double required,
                           RotationState state);

/// Splits `required` in proportion to current outputs.
Allocation allocate_pro_rata(const Fleet& fleet, std::span<const double> outputs,
                             double required);

/// Fractional round robin: walks the rota taking from each generator up to its
/// remaining MW quota; quotas start at rated capacity and are all refilled
/// once every one is spent. The pointer stays on the first generator that
/// still has quota.
RotationStep allocate_frr(const Fleet& fleet, std::span<const double> outputs, double required,
                          RotationState state);

/// Dispatches to the allocator for `rule`; `state` is updated in place.
Allocation allocate(RuleKind rule, const Fleet& fleet, std::span<const double> outputs,
                    double required, RotationState& state);

struct GeneratorMetrics {
  std::string generator_id;
  double capacity_factor = 0.0;   ///< delivered / (rated * hours)
  double cf_uncurtailed = 0.0;    ///< available / (rated * hours)
  std::size_t event_count = 0;    ///< intervals with curtailment > 1e-9 MW
  double delivered_mwh = 0.0;
  double curtailed_mwh = 0.0;

  double cf_reduction() const {
    return cf_uncurtailed > 0.0 ? 1.0 - capacity_factor / cf_uncurtailed : 0.0;
  }
};

/// Hourly simulation outcome. Per-interval arrays are interval-major:
/// value for (interval t, generator i) sits at t * generators + i.
struct TimelineResult {
  RuleKind rule = RuleKind::lifo;
  std::size_t intervals = 0;
  std::size_t generators = 0;
  std::vector<double> output_mw;
  std::vector<double> curtailed_mw;
  std::vector<GeneratorMetrics> metrics;
  double fairness_variance = 0.0;  ///< population variance of the CFs

  double mean_event_count() const;
  double mean_capacity_factor() const;
  double output_at(std::size_t t, std::size_t i) const { return output_mw[t * generators + i]; }
  double curtailed_at(std::size_t t, std::size_t i) const {
    return curtailed_mw[t * generators + i];
  }
};

/// Runs `rule` over aligned hourly series. `power_inputs[i]` is generator i's
/// normalized output in [0, 1]; `demand_mw` is the export limit per interval.
TimelineResult simulate(const Fleet& fleet, std::span<const std::vector<double>> power_inputs,
                        std::span<const double> demand_mw, RuleKind rule);

/// timestamp,generator_id,output_mw,curtailed_mw
void write_timeline_csv(std::ostream& out, const TimelineResult& result, const Fleet& fleet,
                        std::span<const Timestamp> times, const csv::Provenance& provenance = {});

/// generator_id,cf,cf_uncurtailed,events
void write_metrics_csv(std::ostream& out, const TimelineResult& result,
                       const csv::Provenance& provenance = {});

}  // namespace gridshare::curtailment
