#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "gridshare/random.hpp"
#include "gridshare/stackelberg.hpp"
#include "gridshare/windmodel.hpp"

using namespace gridshare;
using namespace gridshare::stackelberg;
using windmodel::BetaParams;
using windmodel::JointPowerDistribution;

namespace {

struct McStats {
  double mean;
  double se;
};

template <class Draw>
McStats monte_carlo(std::size_t n, Draw&& draw) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = draw();
    s += v;
    s2 += v * v;
  }
  const double m = s / static_cast<double>(n);
  const double var = s2 / static_cast<double>(n) - m * m;
  return {m, std::sqrt(var / static_cast<double>(n))};
}

// Every pair on the grid where the follower plays a best response, then the
// leader's best among them; ties to the smallest index on both sides.
std::pair<std::size_t, std::size_t> brute_force(const EnergyModel& model, const StrategyGrid& g,
                                                const CostParams& c) {
  const std::size_t n = g.size();
  std::size_t b1 = 0, b2 = 0;
  double best1 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double f_best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      f_best = std::max(f_best, profit_follower(model.energies(g.at(i), g.at(j)), c));
    }
    std::size_t j_star = 0;
    while (profit_follower(model.energies(g.at(i), g.at(j_star)), c) != f_best) ++j_star;
    const double l = profit_leader(model.energies(g.at(i), g.at(j_star)), c);
    if (l > best1) {
      best1 = l;
      b1 = i;
      b2 = j_star;
    }
  }
  return {b1, b2};
}

}  // namespace

TEST_CASE("profits") {
  const EnergyQuadruple zero;
  const auto c = CostParams::from_fractions(74.3, 0.26, 0.30, 0.30, 230e6);
  CHECK(profit_leader(zero, c) == -230e6);
  CHECK(profit_follower(zero, c) == 0.0);

  const auto c1 = CostParams::from_fractions(74.3, 0.0, 0.3, 0.0, 0.0);
  CHECK(profit_leader({100, 0, 0, 0}, c1) == doctest::Approx(5201.0).epsilon(1e-12));

  const auto c2 = CostParams::from_fractions(74.3, 0.26, 0.0, 0.30, 0.0);
  CHECK(profit_follower({0, 100, 0, 10}, c2) == doctest::Approx(2719.38).epsilon(1e-12));

  const auto c3 = CostParams::from_fractions(74.3, 1.0, 0.0, 0.1, 0.0);
  CHECK(profit_follower({0, 50, 0, 5}, c3) < 0.0);

  // Transmission revenue counts delivered follower energy.
  const auto c4 = CostParams{100.0, 10.0, 0.0, 0.0, 0.0};
  CHECK(profit_leader({0, 100, 0, 20}, c4) == doctest::Approx(800.0));

  CHECK_THROWS(CostParams{0.0, 0, 0, 0, 0}.validate());
  CHECK_THROWS(CostParams{74.3, -1, 0, 0, 0}.validate());
}

TEST_CASE("fair share and empirical energies") {
  auto [a, b] = fair_share_energy(100, 100, 30);
  CHECK(a == 15.0);
  CHECK(b == 15.0);
  std::tie(a, b) = fair_share_energy(300, 100, 40);
  CHECK(a == doctest::Approx(30.0));
  CHECK(b == doctest::Approx(10.0));
  std::tie(a, b) = fair_share_energy(0, 0, 0);
  CHECK(a == 0.0);
  CHECK_THROWS(fair_share_energy(0, 0, 5));

  const std::vector<double> one = {1.0};
  const std::vector<double> d6 = {6.0};
  const auto e = empirical_energies(7, 3, one, one, d6);
  CHECK(e.e_g1 == 7.0);
  CHECK(e.e_g2 == 3.0);
  CHECK(e.e_c1 == doctest::Approx(2.8));
  CHECK(e.e_c2 == doctest::Approx(1.2));

  const std::vector<double> x = {0.2, 0.9, 0.5};
  const std::vector<double> big = {50, 50, 50};
  const auto none = empirical_energies(20, 20, x, x, big);
  CHECK(none.e_c1 == 0.0);
  CHECK(none.e_c2 == 0.0);
  CHECK_THROWS_AS(empirical_energies(1, 1, x, one, big), DataError);
}

TEST_CASE("uniform box excess") {
  CHECK(expected_excess_uniform_box(-1.0, 1.0, 1.0) == doctest::Approx(1.0 / 6.0));
  CHECK(expected_excess_uniform_box(2.0, 0.0, 0.0) == 2.0);
  CHECK(expected_excess_uniform_box(-3.0, 1.0, 1.0) == 0.0);
  CHECK(expected_excess_uniform_box(0.5, 1.0, 1.0) == doctest::Approx(1.5));

  Rng rng(8);
  for (int k = 0; k < 30; ++k) {
    const double a = rng.uniform() * 3.0, b = rng.uniform() * 2.0;
    const double c = (rng.uniform() - 0.7) * 4.0;
    const auto mc = monte_carlo(200000, [&] {
      return std::max(0.0, c + a * rng.uniform() + b * rng.uniform());
    });
    CHECK(std::abs(expected_excess_uniform_box(c, a, b) - mc.mean) <= 4.0 * mc.se + 1e-12);
  }
}

TEST_CASE("expected generation and curtailment identities") {
  const BetaParams beta{2.0, 5.0};
  CHECK(std::abs(expected_generation(beta, 10.0) - 10.0 * 2.0 / 7.0) <= 1e-6);
  CHECK(expected_generation(beta, 0.0) == 0.0);

  const auto uni = JointPowerDistribution::uniform(8);
  CHECK(expected_generation(uni, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(expected_curtailment(uni, 1.0, 1.0, 1.0) - 1.0 / 6.0) <= 1e-4);
  CHECK(expected_curtailment(uni, 1.0, 1.0, 2.0) == 0.0);
  CHECK(expected_curtailment(uni, 3.0, 2.0, 0.0) ==
        doctest::Approx(expected_generation(uni, 3.0, 2.0)));

  CHECK(expected_curtailment(beta, 10.0, 10.0) == 0.0);
  CHECK(expected_curtailment(beta, 10.0, 0.0) == doctest::Approx(expected_generation(beta, 10.0)));
  const BetaParams flat{1.0, 1.0};
  CHECK(std::abs(expected_curtailment(flat, flat, 1.0, 1.0, 1.0) - 1.0 / 6.0) <= 1e-6);
  CHECK(expected_curtailment(flat, flat, 1.0, 1.0, 2.0) == 0.0);
}

TEST_CASE("quadrature agrees with Monte Carlo for fitted Betas") {
  const BetaParams d1{0.7, 1.4}, d2{2.3, 1.1};
  Rng rng(31);
  const double p1 = 60, p2 = 35, demand = 40;
  const auto mc = monte_carlo(1000000, [&] {
    return std::max(0.0, rng.beta(d1.alpha, d1.beta) * p1 + rng.beta(d2.alpha, d2.beta) * p2 - demand);
  });
  CHECK(std::abs(expected_curtailment(d1, d2, p1, p2, demand) - mc.mean) <= 3.0 * mc.se);

  Rng r1(32);
  const auto single = monte_carlo(1000000, [&] {
    return std::max(0.0, r1.beta(d1.alpha, d1.beta) * p1 - 20.0);
  });
  CHECK(std::abs(expected_curtailment(d1, p1, 20.0) - single.mean) <= 3.0 * single.se);
}

TEST_CASE("histogram curtailment agrees with Monte Carlo over its density") {
  Rng data(5);
  std::vector<double> a(3000), b(3000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = data.uniform();
    a[i] = u < 0.2 ? 0.0 : (u > 0.9 ? 1.0 : data.beta(2, 3));
    b[i] = std::clamp(0.6 * a[i] + 0.4 * data.uniform(), 0.0, 1.0);
  }
  const auto h = windmodel::joint_histogram(a, b, {3, 1}, 10);

  // Sample cells by probability, then uniformly inside their support box.
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& c : h.cells()) cdf.push_back(acc += c.probability);
  Rng rng(6);
  const double p1 = 80, p2 = 50, demand = 55;
  const auto mc = monte_carlo(1000000, [&] {
    const double u = rng.uniform() * acc;
    const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const auto box = h.support(k / 10, k % 10);
    const double x1 = box.x1_lo + (box.x1_hi - box.x1_lo) * rng.uniform();
    const double x2 = box.x2_lo + (box.x2_hi - box.x2_lo) * rng.uniform();
    return std::max(0.0, x1 * p1 + x2 * p2 - demand);
  });
  CHECK(std::abs(expected_curtailment(h, p1, p2, demand) - mc.mean) <= 3.0 * mc.se);
}

TEST_CASE("strategy grid and surface") {
  const StrategyGrid g{415.0, 0.5};
  CHECK(g.size() == 831);
  CHECK(g.at(830) == 415.0);
  CHECK(StrategyGrid{415.0, 2.5}.size() == 167);
  CHECK_THROWS(StrategyGrid{1.0, 0.0}.validate());
  CHECK_THROWS(StrategyGrid{1.0, 2.0}.validate());

  Rng rng(2);
  std::vector<double> x1(500), x2(500), d(500);
  for (std::size_t i = 0; i < 500; ++i) {
    x1[i] = rng.uniform();
    x2[i] = rng.uniform();
    d[i] = 5.0 + 10.0 * rng.uniform();
  }
  const ReplayEnergyModel model(x1, x2, d);
  const StrategyGrid small{20.0, 1.0};
  const EnergySurface one(model, small, 1), many(model, small, 4);
  for (std::size_t i = 0; i < small.size(); ++i) {
    for (std::size_t j = 0; j < small.size(); ++j) {
      CHECK(one.at(i, j).e_c1 == many.at(i, j).e_c1);
      CHECK(one.at(i, j).e_g2 == many.at(i, j).e_g2);
    }
  }
  const ReplayEnergyModel scaled(x1, x2, d, 1000.0);
  CHECK(scaled.energies(3, 4).e_g1 == doctest::Approx(model.energies(3, 4).e_g1 * 2.0));
}

TEST_CASE("follower best response edge cases") {
  const std::vector<double> ones(10, 1.0), big(10, 1e6), d1(10, 1.0);
  const StrategyGrid g{10.0, 1.0};

  const ReplayEnergyModel open(ones, ones, big);
  const EnergySurface s(open, g);
  const auto costly = CostParams{74.3, 74.3, 0.0, 5.0, 0.0};
  const auto costless = CostParams{74.3, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(follower_best_response(s, costly, i) == 0);
    CHECK(follower_best_response(s, costless, i) == g.size() - 1);
  }

  // x1 = x2 = 1 always, D = 1: follower profit at each grid pair by hand.
  const ReplayEnergyModel tight(ones, ones, d1);
  const StrategyGrid g3{2.0, 1.0};
  const EnergySurface t(tight, g3);
  const auto c = CostParams{10.0, 2.0, 1.0, 1.0, 0.0};
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t want = 0;
    double best = -1e300;
    for (std::size_t j = 0; j < 3; ++j) {
      const double p1 = g3.at(i), p2 = g3.at(j);
      const double excess = std::max(0.0, p1 + p2 - 1.0);
      const double cur2 = p1 + p2 > 0 ? excess * p2 / (p1 + p2) : 0.0;
      const double profit = 10.0 * ((p2 - cur2) * 8.0 - p2 * 1.0);
      if (profit > best) {
        best = profit;
        want = j;
      }
    }
    CHECK(follower_best_response(t, c, i) == want);
  }
}

TEST_CASE("equilibrium matches exhaustive search") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 24;
    std::vector<double> x1(n), x2(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      x1[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
      x2[i] = rng.uniform();
      d[i] = 2.0 + 6.0 * rng.uniform();
    }
    const ReplayEnergyModel model(x1, x2, d);
    const StrategyGrid g{10.0, 1.0};
    const double pt = rng.uniform() * 0.5;
    const double cg1 = rng.uniform() * 0.5;
    const double cg2 = rng.uniform() * 0.5;
    const auto c = CostParams::from_fractions(10.0, pt, cg1, cg2, rng.uniform() * 20.0);
    const auto r = solve_equilibrium(model, g, c);
    const auto [b1, b2] = brute_force(model, g, c);
    CHECK(r.i1_star == b1);
    CHECK(r.i2_star == b2);
    CHECK(r.follower_response_curve[r.i1_star].p_n2_star == r.p_n2_star);
    const auto e = model.energies(r.p_n1_star, r.p_n2_star);
    CHECK(r.profit1 == profit_leader(e, c));
    CHECK(r.profit2 == profit_follower(e, c));
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(profit_follower(model.energies(r.p_n1_star, g.at(j)), c) <= r.profit2);
    }
    for (const auto& pt : r.follower_response_curve) {
      CHECK(profit_leader(model.energies(pt.p_n1, pt.p_n2_star), c) <= r.profit1);
    }
  }
}

TEST_CASE("non-viable equilibria are flagged, not suppressed") {
  const std::vector<double> x(10, 0.5), d(10, 100.0);
  const ReplayEnergyModel model(x, x, d);
  const auto c = CostParams{74.3, 10.0, 10.0, 10.0, 1e9};
  const auto r = solve_equilibrium(model, {10.0, 1.0}, c);
  CHECK_FALSE(r.viable1);
  CHECK(r.viable2);
  CHECK(r.profit1 < 0.0);
  CHECK(r.p_n1_star == 10.0);
}

TEST_CASE("sweeps") {
  const auto [base1, s1] = scenario_preset(1);
  CHECK(base1.c_g1 == doctest::Approx(0.30 * 74.3));
  CHECK(base1.p_t == doctest::Approx(0.26 * 74.3));
  CHECK(s1.param == SweepParam::c_g2);
  CHECK(s1.values().size() == 24);
  CHECK(s1.values().front() == doctest::Approx(0.06 * 74.3));
  CHECK(s1.values().back() == doctest::Approx(0.52 * 74.3));
  const auto [base3, s3] = scenario_preset(3);
  CHECK(base3.c_g2 == doctest::Approx(0.20 * 74.3));
  CHECK(s3.values().size() == 39);
  CHECK(scenario_preset(2).second.values().size() == 19);
  CHECK_THROWS(scenario_preset(4));

  const SweepSpec empty{"x", SweepParam::p_t, 5.0, 1.0, 1.0};
  CHECK(empty.values().empty());
  const std::vector<double> x(4, 0.5), d(4, 3.0);
  const ReplayEnergyModel model(x, x, d);
  const EnergySurface surface(model, {4.0, 1.0});
  CHECK(scenario_sweep(surface, base1, empty).empty());

  std::ostringstream os;
  write_sweep_csv(os, std::vector<SweepRow>{});
  CHECK(os.str() ==
        "# generator: gridshare\n"
        "scenario_id,varied_param,value,p_n1_star,p_n2_star,profit1,profit2,e_g1,e_g2,e_c1,e_c2,"
        "viable1,viable2\n");

  const auto rows = scenario_sweep(surface, base1, {"S1", SweepParam::c_g2, 1.0, 3.0, 1.0});
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].value == 3.0);
  std::ostringstream rc;
  write_response_csv(rc, rows[0].result);
  CHECK(rc.str().find("\np_n1,p_n2_star,profit2\n0,") != std::string::npos);
  CHECK(parse_sweep_param("p_t") == SweepParam::p_t);
  CHECK_THROWS(parse_sweep_param("p_g"));
}

TEST_CASE("binned model on a single bin") {
  Rng rng(12);
  const std::size_t n = 4000;
  std::vector<double> x1(n), x2(n), d(n);
  std::vector<Timestamp> times(n);
  const auto t0 = parse_timestamp("2015-04-01T05:00Z");
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = rng.uniform();
    x2[i] = std::clamp(0.5 * x1[i] + 0.5 * rng.uniform(), 0.0, 1.0);
    d[i] = 30.0;
    times[i] = t0 + std::chrono::hours(24 * (i % 60));
  }
  const auto binned = BinnedEnergyModel::from_series(x1, x2, d, times, 20);
  CHECK(binned.total_hours() == doctest::Approx(static_cast<double>(n)));
  const auto e = binned.energies(40.0, 20.0);
  const auto exact = empirical_energies(40.0, 20.0, x1, x2, d);
  CHECK(e.e_g1 == doctest::Approx(exact.e_g1).epsilon(1e-9));
  CHECK(e.e_g2 == doctest::Approx(exact.e_g2).epsilon(1e-9));
  CHECK(std::abs(e.e_c1 + e.e_c2 - exact.e_c1 - exact.e_c2) <= 0.02 * (exact.e_c1 + exact.e_c2));
}
