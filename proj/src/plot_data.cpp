#include "gridshare/plot_data.hpp"

#include <ostream>

namespace gridshare::plot {

void write_points(std::ostream& out, std::span<const Point> points,
                  const csv::Provenance& provenance) {
  csv::write_provenance(out, provenance);
  out << "series_label,x,y\n";
  for (const auto& p : points) csv::write_row(out, {p.series, p.x, csv::format_double(p.y)});
}

namespace {

template <class Metric>
std::vector<Point> per_generator(std::span<const SimulationRun> runs, Metric metric) {
  std::vector<Point> out;
  for (const auto& run : runs) {
    const std::string rule(curtailment::to_string(run.result.rule));
    for (const auto& m : run.result.metrics) {
      out.push_back({m.generator_id + " " + run.label, rule, metric(m)});
    }
  }
  return out;
}

template <class Value>
std::vector<Point> per_row(std::span<const stackelberg::SweepRow> rows, double p_g,
                           std::initializer_list<std::pair<const char*, Value>> series) {
  std::vector<Point> out;
  for (const auto& [name, value] : series) {
    for (const auto& row : rows) {
      out.push_back({name, csv::format_double(row.value / p_g), value(row.result)});
    }
  }
  return out;
}

using Getter = double (*)(const stackelberg::EquilibriumResult&);

}  // namespace

std::vector<Point> cf_points(std::span<const SimulationRun> runs) {
  return per_generator(runs, [](const curtailment::GeneratorMetrics& m) {
    return m.capacity_factor;
  });
}

std::vector<Point> event_points(std::span<const SimulationRun> runs) {
  return per_generator(runs, [](const curtailment::GeneratorMetrics& m) {
    return static_cast<double>(m.event_count);
  });
}

std::vector<Point> fairness_points(std::span<const SimulationRun> runs) {
  std::vector<Point> out;
  for (const auto& run : runs) {
    out.push_back({run.label, std::string(curtailment::to_string(run.result.rule)),
                   run.result.fairness_variance});
  }
  return out;
}

std::vector<Point> sweep_capacity_points(std::span<const stackelberg::SweepRow> rows, double p_g) {
  return per_row<Getter>(rows, p_g,
                         {{"p_n1_star", [](const auto& r) { return r.p_n1_star; }},
                          {"p_n2_star", [](const auto& r) { return r.p_n2_star; }}});
}

std::vector<Point> sweep_profit_points(std::span<const stackelberg::SweepRow> rows, double p_g) {
  return per_row<Getter>(rows, p_g,
                         {{"profit1", [](const auto& r) { return r.profit1; }},
                          {"profit2", [](const auto& r) { return r.profit2; }}});
}

std::vector<Point> sweep_energy_points(std::span<const stackelberg::SweepRow> rows, double p_g) {
  return per_row<Getter>(rows, p_g,
                         {{"e_g1", [](const auto& r) { return r.energies.e_g1; }},
                          {"e_g2", [](const auto& r) { return r.energies.e_g2; }},
                          {"e_c1", [](const auto& r) { return r.energies.e_c1; }},
                          {"e_c2", [](const auto& r) { return r.energies.e_c2; }}});
}

}  // namespace gridshare::plot
