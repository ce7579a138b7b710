#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bwmarket/config.hpp"
#include "bwmarket/estimate.hpp"
#include "bwmarket/io.hpp"
#include "bwmarket/market.hpp"
#include "bwmarket/metrics.hpp"
#include "bwmarket/sde.hpp"
#include "bwmarket/simulator.hpp"
#include "bwmarket/topology.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& xs) {
  Array out(static_cast<py::ssize_t>(xs.size()));
  std::copy(xs.begin(), xs.end(), out.mutable_data());
  return out;
}

Array to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<py::ssize_t>(rows.size());
  const auto m = static_cast<py::ssize_t>(rows.empty() ? 0 : rows.front().size());
  Array out({n, m});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t j = 0; j < m; ++j) view(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

bwm::PriceSeries series_of(const Array& values, double dt) {
  if (values.ndim() != 1) throw std::invalid_argument("expected a one-dimensional series");
  bwm::PriceSeries s;
  s.values.assign(values.data(), values.data() + values.size());
  s.dt = dt;
  return s;
}

std::vector<std::vector<double>> streams_of(const std::vector<Array>& arrays) {
  std::vector<std::vector<double>> out;
  for (const auto& a : arrays) out.emplace_back(a.data(), a.data() + a.size());
  return out;
}

Array prices_of(const bwm::SimulationLog& log) {
  std::vector<std::vector<double>> rows;
  rows.reserve(log.records.size());
  for (const auto& r : log.records) rows.push_back(r.prices);
  return to_matrix(rows);
}

py::dict demand_dict(const bwm::Demand& d) {
  py::dict out;
  out["id"] = d.id;
  out["uid"] = d.uid;
  out["src"] = d.src;
  out["dst"] = d.dst;
  out["cap"] = d.cap;
  out["dur"] = d.dur;
  out["max"] = d.max;
  out["start_step"] = d.start_step;
  out["outcome"] = bwm::to_string(d.outcome);
  out["est_cost"] = d.est_cost;
  out["path"] = d.path;
  out["sell_step"] = d.sell_step;
  out["realized_cash"] = d.realized_cash;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bandwidth market simulator and SDE calibration toolkit";
  m.attr("__version__") = std::string(bwm::kToolVersion);

  py::register_exception<bwm::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<bwm::TopologyError>(m, "TopologyError", PyExc_ValueError);
  py::register_exception<bwm::DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
  py::register_exception<bwm::NonNormalizableError>(m, "NonNormalizableError", PyExc_ValueError);

  py::class_<bwm::Topology>(m, "Topology")
      .def(py::init([](int nodes, const std::vector<std::pair<int, int>>& edges) {
             std::vector<bwm::Edge> list;
             for (auto [u, v] : edges) list.push_back({u, v});
             return bwm::Topology::from_edges(nodes, std::move(list));
           }),
           py::arg("nodes"), py::arg("edges"))
      .def_property_readonly("node_count", &bwm::Topology::node_count)
      .def_property_readonly("edges",
                             [](const bwm::Topology& t) {
                               std::vector<std::pair<int, int>> out;
                               for (const auto& e : t.edges()) out.emplace_back(e.u, e.v);
                               return out;
                             })
      .def("adjacent", &bwm::Topology::adjacent)
      .def("__str__", &bwm::format_topology);
  m.def("parse_topology", &bwm::parse_topology, py::arg("text"));
  m.def("default_topology", &bwm::default_topology);
  m.def(
      "least_cost_path",
      [](const bwm::Topology& t, const std::vector<double>& prices, int src, int dst, double cap) {
        const auto q = bwm::least_cost_path(t, prices, src, dst, cap);
        return py::make_tuple(q.path, q.est_cost);
      },
      py::arg("topology"), py::arg("prices"), py::arg("src"), py::arg("dst"), py::arg("cap"),
      "Cheapest route as (path, estimated cost).");

  py::enum_<bwm::CashRule>(m, "CashRule")
      .value("POST_IMPACT", bwm::CashRule::PostImpact)
      .value("PRE_TRADE", bwm::CashRule::PreTrade);

  py::class_<bwm::MarketState>(m, "MarketState")
      .def(py::init<double, double>(), py::arg("initial_price"), py::arg("liquidity"))
      .def_property_readonly("price", &bwm::MarketState::price)
      .def_property_readonly("liquidity", &bwm::MarketState::liquidity)
      .def(
          "execute",
          [](bwm::MarketState& s, double volume, bwm::CashRule rule) {
            const auto t = s.execute(volume, rule);
            return py::make_tuple(t.unit_price, t.cash_delta);
          },
          py::arg("volume"), py::arg("rule") = bwm::CashRule::PostImpact,
          "Trade and return (unit price, cash change).")
      .def("implied_load", &bwm::MarketState::implied_load);

  py::class_<bwm::SimulationConfig>(m, "SimulationConfig")
      .def(py::init<>())
      .def_readwrite("routers", &bwm::SimulationConfig::routers)
      .def_readwrite("users", &bwm::SimulationConfig::users)
      .def_readwrite("steps", &bwm::SimulationConfig::steps)
      .def_readwrite("dt", &bwm::SimulationConfig::dt)
      .def_readwrite("demands_per_step", &bwm::SimulationConfig::demands_per_step)
      .def_readwrite("max_duration", &bwm::SimulationConfig::max_duration)
      .def_readwrite("capacity_exponent", &bwm::SimulationConfig::capacity_exponent)
      .def_readwrite("unit_value", &bwm::SimulationConfig::unit_value)
      .def_readwrite("budget_factor", &bwm::SimulationConfig::budget_factor)
      .def_readwrite("liquidity", &bwm::SimulationConfig::liquidity)
      .def_readwrite("initial_price", &bwm::SimulationConfig::initial_price)
      .def_readwrite("topology", &bwm::SimulationConfig::topology)
      .def_readwrite("seed", &bwm::SimulationConfig::seed)
      .def_readwrite("cash_rule", &bwm::SimulationConfig::cash_rule)
      .def("validate", &bwm::SimulationConfig::validate)
      .def("__str__", &bwm::format_config);
  m.def("parse_config", [](const std::string& text) { return bwm::parse_config(text); }, py::arg("text"));
  m.def("load_config", [](const std::string& path) { return bwm::load_config_file(path); }, py::arg("path"));

  py::class_<bwm::SimulationLog>(m, "SimulationLog")
      .def_readonly("config", &bwm::SimulationLog::config)
      .def_property_readonly("prices", &prices_of, "Price per step (rows) and router (columns).")
      .def_property_readonly("final_cash", [](const bwm::SimulationLog& l) { return to_array(l.final_cash); })
      .def_property_readonly("demands",
                             [](const bwm::SimulationLog& l) {
                               py::list out;
                               for (const auto& d : l.demands) out.append(demand_dict(d));
                               return out;
                             })
      .def("success_ratio", &bwm::success_ratio)
      .def("mean_profit_per_user", [](const bwm::SimulationLog& l) { return bwm::net_profit(l).mean_per_user; })
      .def("mean_profit_per_demand", [](const bwm::SimulationLog& l) { return bwm::net_profit(l).mean_per_demand; })
      .def("load_series", [](const bwm::SimulationLog& l) { return to_matrix(bwm::load_series(l)); })
      .def("max_load_discrepancy", &bwm::max_load_discrepancy)
      .def("price_csv", [](const bwm::SimulationLog& l) {
        std::ostringstream out;
        bwm::write_price_csv(out, l);
        return out.str();
      });
  m.def("run", &bwm::run, py::arg("config"), py::call_guard<py::gil_scoped_release>());

  py::enum_<bwm::NoiseKind>(m, "NoiseKind")
      .value("ADDITIVE", bwm::NoiseKind::Additive)
      .value("MULTIPLICATIVE", bwm::NoiseKind::Multiplicative);

  py::class_<bwm::SdeParams>(m, "SdeParams")
      .def(py::init([](bwm::NoiseKind kind, double alpha, double mu, double sigma) {
             return bwm::SdeParams{kind, alpha, mu, sigma};
           }),
           py::arg("kind"), py::arg("alpha"), py::arg("mu"), py::arg("sigma"))
      .def_readwrite("kind", &bwm::SdeParams::kind)
      .def_readwrite("alpha", &bwm::SdeParams::alpha)
      .def_readwrite("mu", &bwm::SdeParams::mu)
      .def_readwrite("sigma", &bwm::SdeParams::sigma)
      .def("__repr__", [](const bwm::SdeParams& p) {
        std::ostringstream out;
        out << "SdeParams(" << bwm::to_string(p.kind) << ", alpha=" << p.alpha << ", mu=" << p.mu
            << ", sigma=" << p.sigma << ")";
        return out.str();
      });

  m.def(
      "stationary_pdf",
      [](const Array& s, const bwm::SdeParams& p) {
        Array out(s.request().shape);
        const double* in = s.data();
        double* dst = out.mutable_data();
        for (py::ssize_t i = 0; i < s.size(); ++i) dst[i] = bwm::stationary_pdf(in[i], p);
        return out;
      },
      py::arg("s"), py::arg("params"));
  m.def("conditional_mean", &bwm::conditional_mean, py::arg("params"), py::arg("s0"), py::arg("tau"));
  m.def(
      "stationary_pdf_numeric",
      [](const std::function<double(double)>& drift, const std::function<double(double)>& diffusion,
         double lo, double hi, std::size_t points) {
        const auto c = bwm::stationary_pdf_numeric(drift, diffusion, lo, hi, points);
        return py::make_tuple(to_array(c.s), to_array(c.density));
      },
      py::arg("drift"), py::arg("diffusion"), py::arg("lo"), py::arg("hi"), py::arg("points") = 401);
  m.def(
      "simulate_path",
      [](const bwm::SdeParams& p, std::size_t steps, double dt, double s0, std::uint64_t seed) {
        return to_array(bwm::simulate_path(p, steps, dt, s0, seed).series.values);
      },
      py::arg("params"), py::arg("steps"), py::arg("dt"), py::arg("s0"), py::arg("seed"));
  m.def(
      "simulate_correlated_paths",
      [](const std::vector<bwm::SdeParams>& params, const std::vector<std::vector<double>>& rho,
         std::size_t steps, double dt, const std::vector<double>& s0, std::uint64_t seed) {
        const auto paths = bwm::simulate_correlated_paths(
            params, bwm::CorrelationMatrix::from_rows(rho), steps, dt, s0, seed);
        std::vector<std::vector<double>> rows;
        for (const auto& p : paths) rows.push_back(p.series.values);
        return to_matrix(rows);
      },
      py::arg("params"), py::arg("rho"), py::arg("steps"), py::arg("dt"), py::arg("s0"),
      py::arg("seed"));

  py::class_<bwm::ModelFit>(m, "ModelFit")
      .def_readonly("params", &bwm::ModelFit::params)
      .def_readonly("k_fit", &bwm::ModelFit::k_fit)
      .def_property_readonly("residuals", [](const bwm::ModelFit& f) { return to_array(f.residuals); });
  m.def(
      "estimate_ou", [](const Array& values, double dt) { return bwm::estimate_ou(series_of(values, dt)); },
      py::arg("values"), py::arg("dt") = 0.01);
  m.def(
      "estimate_mn",
      [](const Array& values, double dt, std::size_t k_max, double guard, std::size_t k_fit) {
        bwm::MnOptions o;
        o.decay.k_max = k_max;
        o.decay.guard = guard;
        o.k_fit = k_fit;
        return bwm::estimate_mn(series_of(values, dt), o);
      },
      py::arg("values"), py::arg("dt") = 0.01, py::arg("k_max") = 20, py::arg("guard") = 0.04,
      py::arg("k_fit") = 0);
  m.def(
      "decay_diagnostics",
      [](const Array& values, double dt, double mu_hat, std::size_t k_max, double guard) {
        const auto c = bwm::decay_diagnostics(series_of(values, dt), mu_hat, {k_max, guard});
        py::dict out;
        out["ratio"] = to_array(c.ratio);
        out["ratio_stderr"] = to_array(c.ratio_stderr);
        out["alpha"] = to_array(c.alpha);
        out["autocov"] = to_array(c.autocov);
        out["guarded"] = c.guarded;
        return out;
      },
      py::arg("values"), py::arg("dt"), py::arg("mu_hat"), py::arg("k_max") = 20,
      py::arg("guard") = 0.04);
  m.def(
      "correlation_matrix",
      [](const std::vector<Array>& streams) {
        const auto rho = bwm::correlation_matrix(streams_of(streams));
        std::vector<std::vector<double>> rows(rho.size(), std::vector<double>(rho.size()));
        for (std::size_t i = 0; i < rho.size(); ++i)
          for (std::size_t j = 0; j < rho.size(); ++j) rows[i][j] = rho(i, j);
        return to_matrix(rows);
      },
      py::arg("streams"));
  m.def(
      "_estimate_report_json",
      [](const Array& values, double dt, bwm::NoiseKind model, std::size_t bins, std::size_t k_max,
         double guard, std::size_t k_fit) {
        bwm::EstimateOptions o;
        o.model = model;
        o.bins = bins;
        o.decay.k_max = k_max;
        o.decay.guard = guard;
        o.k_fit = k_fit;
        return bwm::report_json(bwm::estimate_report(series_of(values, dt), o));
      },
      py::arg("values"), py::arg("dt"), py::arg("model"), py::arg("bins"), py::arg("k_max"),
      py::arg("guard"), py::arg("k_fit"));
}
