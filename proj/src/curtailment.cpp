#include "gridshare/curtailment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "gridshare/errors.hpp"

namespace gridshare::curtailment {

namespace {

// Remaining need or quota at or below this is spent.
constexpr double kResidualMw = 1e-12;

double checked_total(const Fleet& fleet, std::span<const double> outputs, double required) {
  if (outputs.size() != fleet.size()) {
    throw std::invalid_argument("outputs size " + std::to_string(outputs.size()) +
                                " does not match fleet size " + std::to_string(fleet.size()));
  }
  double total = 0.0;
  for (double p : outputs) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("outputs must be >= 0");
    total += p;
  }
  if (!std::isfinite(required) || required < 0.0) {
    throw std::invalid_argument("required curtailment must be >= 0");
  }
  if (required > total + kResidualMw * std::max(1.0, total)) {
    throw std::invalid_argument("required curtailment exceeds total output");
  }
  return total;
}

void check_state(const Fleet& fleet, RotationState& state, bool needs_quotas) {
  if (state.pointer >= fleet.size()) throw std::invalid_argument("rota pointer out of range");
  if (!needs_quotas) return;
  if (state.quotas_mw.empty()) state.quotas_mw = RotationState::initial(fleet).quotas_mw;
  if (state.quotas_mw.size() != fleet.size()) {
    throw std::invalid_argument("quota vector does not match fleet size");
  }
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const double q = state.quotas_mw[i];
    if (!(q >= 0.0) || q > fleet[i].rated_mw) {
      throw std::invalid_argument("FRR quota outside [0, rated]");
    }
  }
}

void refill(const Fleet& fleet, std::vector<double>& quotas) {
  for (std::size_t i = 0; i < fleet.size(); ++i) quotas[i] = fleet[i].rated_mw;
}

bool all_spent(const std::vector<double>& quotas) {
  return std::all_of(quotas.begin(), quotas.end(), [](double q) { return q <= 0.0; });
}

}  // namespace

std::string_view to_string(RuleKind rule) {
  switch (rule) {
    case RuleKind::lifo: return "lifo";
    case RuleKind::rota: return "rota";
    case RuleKind::pro_rata: return "pro_rata";
    case RuleKind::frr: return "frr";
  }
  return "unknown";
}

RuleKind parse_rule(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lifo") return RuleKind::lifo;
  if (lower == "rota") return RuleKind::rota;
  if (lower == "pro_rata" || lower == "prorata" || lower == "pro-rata") return RuleKind::pro_rata;
  if (lower == "frr") return RuleKind::frr;
  throw std::invalid_argument("unknown curtailment rule '" + std::string(name) + "'");
}

Fleet::Fleet(std::vector<GeneratorSpec> generators, std::vector<std::size_t> rotation)
    : generators_(std::move(generators)), rotation_(std::move(rotation)) {
  if (generators_.empty()) throw std::invalid_argument("fleet needs at least one generator");
  std::set<int> orders;
  std::set<std::string> ids;
  for (const auto& g : generators_) {
    if (!(g.rated_mw > 0.0) || !std::isfinite(g.rated_mw)) {
      throw std::invalid_argument("generator '" + g.id + "' needs rated_mw > 0");
    }
    if (g.connection_order < 1) {
      throw std::invalid_argument("generator '" + g.id + "' needs connection_order >= 1");
    }
    if (!orders.insert(g.connection_order).second) {
      throw std::invalid_argument("duplicate connection_order " +
                                  std::to_string(g.connection_order));
    }
    if (!ids.insert(g.id).second) throw std::invalid_argument("duplicate generator id " + g.id);
  }
  std::vector<std::size_t> by_order(generators_.size());
  std::iota(by_order.begin(), by_order.end(), std::size_t{0});
  std::sort(by_order.begin(), by_order.end(), [&](std::size_t a, std::size_t b) {
    return generators_[a].connection_order < generators_[b].connection_order;
  });
  if (rotation_.empty()) {
    rotation_ = by_order;
  } else {
    std::vector<std::size_t> sorted = rotation_;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> expected(generators_.size());
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    if (sorted != expected) {
      throw std::invalid_argument("rota must list every generator exactly once");
    }
  }
  lifo_order_.assign(by_order.rbegin(), by_order.rend());
}

double Fleet::total_rated_mw() const {
  double total = 0.0;
  for (const auto& g : generators_) total += g.rated_mw;
  return total;
}

RotationState RotationState::initial(const Fleet& fleet) {
  RotationState state;
  state.quotas_mw.resize(fleet.size());
  refill(fleet, state.quotas_mw);
  return state;
}

double Allocation::total() const {
  return std::accumulate(curtailed_mw.begin(), curtailed_mw.end(), 0.0);
}

double required_curtailment(std::span<const double> outputs, double demand_mw) {
  if (!std::isfinite(demand_mw) || demand_mw < 0.0) {
    throw std::invalid_argument("demand must be >= 0");
  }
  double total = 0.0;
  for (double p : outputs) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("outputs must be >= 0");
    total += p;
  }
  return std::max(0.0, total - demand_mw);
}

Allocation allocate_lifo(const Fleet& fleet, std::span<const double> outputs, double required) {
  checked_total(fleet, outputs, required);
  Allocation a{std::vector<double>(fleet.size(), 0.0), required};
  double need = required;
  for (std::size_t idx : fleet.lifo_order()) {
    if (need <= 0.0) break;
    const double take = std::min(need, outputs[idx]);
    a.curtailed_mw[idx] = take;
    need -= take;
  }
  return a;
}

RotationStep allocate_rota(const Fleet& fleet, std::span<const double> outputs, double required,
                           RotationState state) {
  checked_total(fleet, outputs, required);
  check_state(fleet, state, false);
  Allocation a{std::vector<double>(fleet.size(), 0.0), required};
  const auto& rota = fleet.rotation();
  const std::size_t n = fleet.size();
  double need = required;
  for (std::size_t k = 0; k < n && need > 0.0; ++k) {
    const std::size_t idx = rota[(state.pointer + k) % n];
    const double take = std::min(need, outputs[idx]);
    a.curtailed_mw[idx] = take;
    need -= take;
  }
  state.pointer = (state.pointer + 1) % n;
  return {std::move(a), std::move(state)};
}

Allocation allocate_pro_rata(const Fleet& fleet, std::span<const double> outputs,
                             double required) {
  const double total = checked_total(fleet, outputs, required);
  Allocation a{std::vector<double>(fleet.size(), 0.0), required};
  if (required == 0.0) return a;
  if (!(total > 0.0)) throw std::invalid_argument("pro rata split needs positive total output");
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    a.curtailed_mw[i] = std::min(outputs[i], required * outputs[i] / total);
  }
  return a;
}

RotationStep allocate_frr(const Fleet& fleet, std::span<const double> outputs, double required,
                          RotationState state) {
  checked_total(fleet, outputs, required);
  check_state(fleet, state, true);
  Allocation a{std::vector<double>(fleet.size(), 0.0), required};
  const auto& rota = fleet.rotation();
  const std::size_t n = fleet.size();
  auto& quotas = state.quotas_mw;
  std::vector<double> available(outputs.begin(), outputs.end());

  double need = required;
  std::size_t pos = state.pointer;
  std::size_t idle = 0;
  bool forced_refill = false;
  while (need > kResidualMw) {
    if (all_spent(quotas)) refill(fleet, quotas);
    const std::size_t idx = rota[pos];
    const double take = std::min({need, quotas[idx], available[idx]});
    if (take > 0.0) {
      if (take >= available[idx]) {
        // Snap to the output so repeated takes cannot round past it.
        a.curtailed_mw[idx] = outputs[idx];
        available[idx] = 0.0;
      } else {
        a.curtailed_mw[idx] += take;
        available[idx] -= take;
      }
      need -= take;
      quotas[idx] -= take;
      if (quotas[idx] <= kResidualMw) quotas[idx] = 0.0;
      idle = 0;
    } else if (++idle >= n) {
      // Every generator with quota left is producing nothing: start a new
      // cycle so the generators that are producing can take their share.
      if (forced_refill) break;
      refill(fleet, quotas);
      forced_refill = true;
      idle = 0;
      continue;
    }
    if (need <= kResidualMw) break;
    pos = (pos + 1) % n;
  }

  if (all_spent(quotas)) refill(fleet, quotas);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = (state.pointer + k) % n;
    if (quotas[rota[p]] > 0.0) {
      state.pointer = p;
      break;
    }
  }
  return {std::move(a), std::move(state)};
}

Allocation allocate(RuleKind rule, const Fleet& fleet, std::span<const double> outputs,
                    double required, RotationState& state) {
  switch (rule) {
    case RuleKind::lifo: return allocate_lifo(fleet, outputs, required);
    case RuleKind::pro_rata: return allocate_pro_rata(fleet, outputs, required);
    case RuleKind::rota: {
      auto step = allocate_rota(fleet, outputs, required, std::move(state));
      state = std::move(step.state);
      return std::move(step.allocation);
    }
    case RuleKind::frr: {
      auto step = allocate_frr(fleet, outputs, required, std::move(state));
      state = std::move(step.state);
      return std::move(step.allocation);
    }
  }
  throw std::invalid_argument("unknown rule");
}

double TimelineResult::mean_event_count() const {
  if (metrics.empty()) return 0.0;
  double total = 0.0;
  for (const auto& m : metrics) total += static_cast<double>(m.event_count);
  return total / static_cast<double>(metrics.size());
}

double TimelineResult::mean_capacity_factor() const {
  if (metrics.empty()) return 0.0;
  double total = 0.0;
  for (const auto& m : metrics) total += m.capacity_factor;
  return total / static_cast<double>(metrics.size());
}

TimelineResult simulate(const Fleet& fleet, std::span<const std::vector<double>> power_inputs,
                        std::span<const double> demand_mw, RuleKind rule) {
  const std::size_t n = fleet.size();
  const std::size_t intervals = demand_mw.size();
  if (power_inputs.size() != n) {
    throw DataError("simulate: expected " + std::to_string(n) + " power series, got " +
                    std::to_string(power_inputs.size()));
  }
  for (const auto& series : power_inputs) {
    if (series.size() != intervals) {
      throw DataError("simulate: power series length " + std::to_string(series.size()) +
                      " does not match demand length " + std::to_string(intervals));
    }
  }
  if (intervals == 0) throw DataError("simulate: no intervals");

  TimelineResult result;
  result.rule = rule;
  result.intervals = intervals;
  result.generators = n;
  result.output_mw.assign(intervals * n, 0.0);
  result.curtailed_mw.assign(intervals * n, 0.0);
  std::vector<double> available(n, 0.0), curtailed(n, 0.0);
  std::vector<std::size_t> events(n, 0);

  RotationState state = RotationState::initial(fleet);
  std::vector<double> outputs(n);
  for (std::size_t t = 0; t < intervals; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = power_inputs[i][t];
      if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
        throw DataError("simulate: normalized power outside [0, 1] at interval " +
                        std::to_string(t));
      }
      outputs[i] = x * fleet[i].rated_mw;
      result.output_mw[t * n + i] = outputs[i];
      available[i] += outputs[i];
    }
    const double required = required_curtailment(outputs, demand_mw[t]);
    if (required <= kCurtailEpsilonMw) continue;
    const Allocation a = allocate(rule, fleet, outputs, required, state);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = a.curtailed_mw[i];
      result.curtailed_mw[t * n + i] = c;
      curtailed[i] += c;
      if (c > kCurtailEpsilonMw) ++events[i];
    }
  }

  const double hours = static_cast<double>(intervals);
  double mean_cf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    GeneratorMetrics m;
    m.generator_id = fleet[i].id;
    m.delivered_mwh = available[i] - curtailed[i];
    m.curtailed_mwh = curtailed[i];
    m.capacity_factor = m.delivered_mwh / (fleet[i].rated_mw * hours);
    m.cf_uncurtailed = available[i] / (fleet[i].rated_mw * hours);
    m.event_count = events[i];
    mean_cf += m.capacity_factor;
    result.metrics.push_back(std::move(m));
  }
  mean_cf /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& m : result.metrics) {
    var += (m.capacity_factor - mean_cf) * (m.capacity_factor - mean_cf);
  }
  result.fairness_variance = var / static_cast<double>(n);
  return result;
}

void write_timeline_csv(std::ostream& out, const TimelineResult& result, const Fleet& fleet,
                        std::span<const Timestamp> times, const csv::Provenance& provenance) {
  if (times.size() != result.intervals) {
    throw DataError("timeline: timestamp count does not match intervals");
  }
  csv::write_provenance(out, provenance);
  out << "timestamp,generator_id,output_mw,curtailed_mw\n";
  for (std::size_t t = 0; t < result.intervals; ++t) {
    const std::string ts = format_timestamp(times[t]);
    for (std::size_t i = 0; i < result.generators; ++i) {
      csv::write_row(out, {ts, fleet[i].id, csv::format_double(result.output_at(t, i)),
                           csv::format_double(result.curtailed_at(t, i))});
    }
  }
}

void write_metrics_csv(std::ostream& out, const TimelineResult& result,
                       const csv::Provenance& provenance) {
  csv::write_provenance(out, provenance);
  out << "generator_id,cf,cf_uncurtailed,events\n";
  for (const auto& m : result.metrics) {
    csv::write_row(out, {m.generator_id, csv::format_double(m.capacity_factor),
                         csv::format_double(m.cf_uncurtailed), std::to_string(m.event_count)});
  }
}

}  // namespace gridshare::curtailment
