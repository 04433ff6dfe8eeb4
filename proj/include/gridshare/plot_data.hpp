#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/curtailment.hpp"
#include "gridshare/stackelberg.hpp"

namespace gridshare::plot {

/// One row of a long-format plot table.
struct Point {
  std::string series;
  std::string x;
  double y = 0.0;
};

/// series_label,x,y
void write_points(std::ostream& out, std::span<const Point> points,
                  const csv::Provenance& provenance = {});

/// A simulation result tagged with the wind setup it came from, e.g. "r=0.5".
struct SimulationRun {
  std::string label;
  curtailment::TimelineResult result;
};

/// Series "<generator> <label>", x = rule, y = capacity factor.
std::vector<Point> cf_points(std::span<const SimulationRun> runs);
/// Series "<label>", x = rule, y = variance of the capacity factors.
std::vector<Point> fairness_points(std::span<const SimulationRun> runs);
/// Series "<generator> <label>", x = rule, y = curtailment events.
std::vector<Point> event_points(std::span<const SimulationRun> runs);

/// x = swept value / p_g. Series p_n1_star, p_n2_star.
std::vector<Point> sweep_capacity_points(std::span<const stackelberg::SweepRow> rows, double p_g);
/// Series profit1, profit2.
std::vector<Point> sweep_profit_points(std::span<const stackelberg::SweepRow> rows, double p_g);
/// Series e_g1, e_g2, e_c1, e_c2.
std::vector<Point> sweep_energy_points(std::span<const stackelberg::SweepRow> rows, double p_g);

}  // namespace gridshare::plot
