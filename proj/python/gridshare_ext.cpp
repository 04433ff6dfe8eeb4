#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gridshare/curtailment.hpp"
#include "gridshare/errors.hpp"
#include "gridshare/ingest.hpp"
#include "gridshare/pipeline.hpp"
#include "gridshare/stackelberg.hpp"
#include "gridshare/windmodel.hpp"

namespace py = pybind11;
namespace gs = gridshare;

namespace {

gs::curtailment::Fleet make_fleet(const std::vector<double>& rated) {
  std::vector<gs::curtailment::GeneratorSpec> specs;
  for (std::size_t i = 0; i < rated.size(); ++i) {
    specs.push_back({"G" + std::to_string(i + 1), rated[i], static_cast<int>(i + 1), ""});
  }
  return gs::curtailment::Fleet(std::move(specs));
}

gs::windmodel::PowerCurve make_curve(const std::string& shape) {
  if (shape == "cubic") return gs::windmodel::PowerCurve::generic_cubic();
  if (shape == "sigmoid") return gs::windmodel::PowerCurve::enercon_e82_sigmoid();
  throw std::invalid_argument("shape must be 'cubic' or 'sigmoid'");
}

py::dict quad_dict(const gs::stackelberg::EnergyQuadruple& e) {
  py::dict d;
  d["e_g1"] = e.e_g1;
  d["e_g2"] = e.e_g2;
  d["e_c1"] = e.e_c1;
  d["e_c2"] = e.e_c2;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gridshare, m) {
  m.doc() = "Curtailment rules and line-investment equilibria";

  py::register_exception<gs::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<gs::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<gs::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("knots_to_ms", &gs::ingest::knots_to_ms, py::arg("knots"));
  m.def("correlation_weight", &gs::windmodel::correlation_weight, py::arg("r"));
  m.def("shear_factor", &gs::windmodel::shear_factor, py::arg("z_a"), py::arg("z_h"),
        py::arg("z_o"));

  m.def(
      "sample_wind",
      [](double c, double k, std::size_t n, std::uint64_t seed) {
        return gs::windmodel::sample_wind({c, k}, n, seed).speeds();
      },
      py::arg("c"), py::arg("k"), py::arg("n"), py::arg("seed"));
  m.def(
      "fit_weibull",
      [](const std::vector<double>& speeds) {
        const auto f = gs::windmodel::fit_weibull(speeds);
        return py::make_tuple(f.params.scale_c, f.params.shape_k, f.used, f.excluded_zeros);
      },
      py::arg("speeds"), "Returns (c, k, used, excluded_zeros).");
  m.def(
      "fit_beta",
      [](const std::vector<double>& x) {
        const auto b = gs::windmodel::fit_beta(x);
        return py::make_tuple(b.alpha, b.beta);
      },
      py::arg("normalized_power"));
  m.def(
      "wind_to_power",
      [](const std::vector<double>& speeds, const std::string& shape) {
        return gs::windmodel::wind_to_power(speeds, make_curve(shape));
      },
      py::arg("speeds"), py::arg("shape") = "cubic");

  m.def(
      "allocate",
      [](const std::string& rule, const std::vector<double>& rated,
         const std::vector<std::vector<double>>& events, const std::vector<double>& demand) {
        // Runs consecutive events so Rota and FRR carry their state.
        if (events.size() != demand.size()) throw std::invalid_argument("events/demand length");
        const auto fleet = make_fleet(rated);
        auto state = gs::curtailment::RotationState::initial(fleet);
        std::vector<std::vector<double>> out;
        for (std::size_t t = 0; t < events.size(); ++t) {
          const double req = gs::curtailment::required_curtailment(events[t], demand[t]);
          out.push_back(gs::curtailment::allocate(gs::curtailment::parse_rule(rule), fleet,
                                                  events[t], req, state)
                            .curtailed_mw);
        }
        return out;
      },
      py::arg("rule"), py::arg("rated_mw"), py::arg("outputs_mw"), py::arg("demand_mw"),
      "Curtailment per generator for a sequence of intervals.");

  m.def(
      "simulate",
      [](const std::string& rule, const std::vector<double>& rated,
         const std::vector<std::vector<double>>& power, const std::vector<double>& demand) {
        const auto fleet = make_fleet(rated);
        const auto r =
            gs::curtailment::simulate(fleet, power, demand, gs::curtailment::parse_rule(rule));
        py::dict d;
        std::vector<double> cf, cf0;
        std::vector<std::size_t> events;
        for (const auto& g : r.metrics) {
          cf.push_back(g.capacity_factor);
          cf0.push_back(g.cf_uncurtailed);
          events.push_back(g.event_count);
        }
        d["cf"] = cf;
        d["cf_uncurtailed"] = cf0;
        d["events"] = events;
        d["fairness_variance"] = r.fairness_variance;
        return d;
      },
      py::arg("rule"), py::arg("rated_mw"), py::arg("power"), py::arg("demand_mw"));

  m.def(
      "expected_curtailment_uniform",
      [](std::size_t bins, double p1, double p2, double demand) {
        return gs::stackelberg::expected_curtailment(
            gs::windmodel::JointPowerDistribution::uniform(bins), p1, p2, demand);
      },
      py::arg("bins"), py::arg("p_n1"), py::arg("p_n2"), py::arg("demand_mw"));

  m.def(
      "profits",
      [](double e_g1, double e_g2, double e_c1, double e_c2, double p_g, double p_t,
         double c_g1, double c_g2, double c_t) {
        const gs::stackelberg::EnergyQuadruple e{e_g1, e_g2, e_c1, e_c2};
        const gs::stackelberg::CostParams c{p_g, p_t, c_g1, c_g2, c_t};
        return py::make_tuple(gs::stackelberg::profit_leader(e, c),
                              gs::stackelberg::profit_follower(e, c));
      },
      py::arg("e_g1"), py::arg("e_g2"), py::arg("e_c1"), py::arg("e_c2"), py::arg("p_g"),
      py::arg("p_t"), py::arg("c_g1"), py::arg("c_g2"), py::arg("c_t"));

  m.def(
      "solve_equilibrium",
      [](std::vector<double> x1, std::vector<double> x2, std::vector<double> demand,
         double max_mw, double step_mw, double p_g, double p_t, double c_g1, double c_g2,
         double c_t) {
        const gs::stackelberg::ReplayEnergyModel model(std::move(x1), std::move(x2),
                                                       std::move(demand));
        const auto r = gs::stackelberg::solve_equilibrium(model, {max_mw, step_mw},
                                                          {p_g, p_t, c_g1, c_g2, c_t});
        py::dict d;
        d["p_n1_star"] = r.p_n1_star;
        d["p_n2_star"] = r.p_n2_star;
        d["profit1"] = r.profit1;
        d["profit2"] = r.profit2;
        d["viable1"] = r.viable1;
        d["viable2"] = r.viable2;
        d["energies"] = quad_dict(r.energies);
        std::vector<std::pair<double, double>> curve;
        for (const auto& p : r.follower_response_curve) curve.emplace_back(p.p_n1, p.p_n2_star);
        d["response_curve"] = curve;
        return d;
      },
      py::arg("x1"), py::arg("x2"), py::arg("demand_mw"), py::arg("max_mw"), py::arg("step_mw"),
      py::arg("p_g"), py::arg("p_t"), py::arg("c_g1"), py::arg("c_g2"), py::arg("c_t"),
      "Equilibrium by full replay of the aligned series.");

  m.def(
      "run",
      [](const std::string& subcommand, const std::optional<std::string>& config,
         const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed,
         const std::optional<std::string>& out) {
        gs::pipeline::Invocation inv;
        inv.subcommand = subcommand;
        if (config) inv.config = *config;
        inv.overrides = overrides;
        inv.seed = seed;
        if (out) inv.out = *out;
        std::ostringstream log, err;
        const int code = gs::pipeline::run(inv, log, err);
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("subcommand"), py::arg("config") = py::none(),
      py::arg("overrides") = std::vector<std::string>{}, py::arg("seed") = py::none(),
      py::arg("out") = py::none(), "Runs a pipeline subcommand; returns (exit_code, log, errors).");
}
