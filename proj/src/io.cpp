#include "bwmarket/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bwmarket/config.hpp"

namespace bwm {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_time(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json array_of(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(nan_safe(x));
  return a;
}

}  // namespace

void write_price_csv(std::ostream& out, const SimulationLog& log) {
  out << 't';
  for (int j = 0; j < log.config.routers; ++j) out << ",S_" << j;
  out << '\n';
  for (const auto& rec : log.records) {
    out << fmt_time(static_cast<double>(rec.step + 1) * log.config.dt);
    for (double p : rec.prices) out << ',' << fmt(p);
    out << '\n';
  }
}

void write_series_csv(std::ostream& out, const PriceSeries& series) {
  out << "t,value\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << fmt_time(static_cast<double>(k + 1) * series.dt) << ',' << fmt(series.values[k]) << '\n';
  }
}

std::vector<PriceSeries> read_price_csv(std::istream& in, double dt) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  if (header.size() < 2) throw std::runtime_error("price csv: header needs t and one series column");

  std::vector<PriceSeries> series(header.size() - 1);
  for (std::size_t c = 1; c < header.size(); ++c) series[c - 1].label = header[c];
  std::vector<double> times;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("price csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " fields, expected " +
                               std::to_string(header.size()));
    }
    try {
      times.push_back(std::stod(cells[0]));
      for (std::size_t c = 1; c < cells.size(); ++c) series[c - 1].values.push_back(std::stod(cells[c]));
    } catch (const std::logic_error&) {
      throw std::runtime_error("price csv: line " + std::to_string(line_no) + ": not a number");
    }
  }
  if (!(dt > 0.0)) {
    if (times.size() < 2) throw std::runtime_error("price csv: cannot infer dt from < 2 rows");
    dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw std::runtime_error("price csv: t column is not increasing");
  }
  for (auto& s : series) s.dt = dt;
  return series;
}

void write_demands_jsonl(std::ostream& out, const SimulationLog& log) {
  for (const auto& d : log.demands) {
    json j = {{"id", d.id},
              {"uid", d.uid},
              {"src", d.src},
              {"dst", d.dst},
              {"cap", d.cap},
              {"dur", d.dur},
              {"max", d.max},
              {"start_step", d.start_step},
              {"outcome", to_string(d.outcome)},
              {"est_cost", d.est_cost},
              {"path", d.path},
              {"sell_step", d.sell_step},
              {"realized_cash", d.realized_cash}};
    out << j.dump() << '\n';
  }
}

std::string manifest_json(const SimulationConfig& c,
                          const std::map<std::string, std::string>& artifacts) {
  json edges = json::array();
  for (const auto& e : c.topology.edges()) edges.push_back({e.u, e.v});
  json j = {{"tool", "bwmarket"},
            {"version", std::string(kToolVersion)},
            {"seed", c.seed},
            {"config",
             {{"N", c.routers},
              {"M", c.users},
              {"L", c.steps},
              {"dt", c.dt},
              {"m", c.demands_per_step},
              {"D", c.max_duration},
              {"K", c.capacity_exponent},
              {"C_unit", c.unit_value},
              {"C_max", c.budget_factor},
              {"lambda", c.liquidity},
              {"S0", c.initial_price},
              {"seed", c.seed},
              {"cash_rule", to_string(c.cash_rule)},
              {"topology",
               {{"source", c.topology_source}, {"nodes", c.topology.node_count()}, {"edges", edges}}}}},
            {"artifacts", artifacts}};
  return j.dump(2) + '\n';
}

SimulationConfig config_from_manifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("manifest", e.what());
  }
  if (!j.contains("config")) throw ConfigError("manifest", "missing config section");
  const json& c = j.at("config");
  SimulationConfig config;
  const auto read = [&](const char* key, auto& target) {
    if (!c.contains(key)) throw ConfigError(key, "missing from manifest");
    try {
      c.at(key).get_to(target);
    } catch (const json::exception& e) {
      throw ConfigError(key, e.what());
    }
  };
  read("N", config.routers);
  read("M", config.users);
  read("L", config.steps);
  read("dt", config.dt);
  read("m", config.demands_per_step);
  read("D", config.max_duration);
  read("K", config.capacity_exponent);
  read("C_unit", config.unit_value);
  read("C_max", config.budget_factor);
  read("lambda", config.liquidity);
  read("S0", config.initial_price);
  read("seed", config.seed);
  std::string rule;
  read("cash_rule", rule);
  if (rule == "post_impact") config.cash_rule = CashRule::PostImpact;
  else if (rule == "pre_trade") config.cash_rule = CashRule::PreTrade;
  else throw ConfigError("cash_rule", "expected post_impact or pre_trade");

  if (!c.contains("topology")) throw ConfigError("topology", "missing from manifest");
  try {
    const json& t = c.at("topology");
    std::vector<Edge> edges;
    for (const auto& e : t.at("edges")) edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    config.topology = Topology::from_edges(t.at("nodes").get<int>(), std::move(edges));
    config.topology_source = t.at("source").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("topology", e.what());
  } catch (const TopologyError& e) {
    throw ConfigError("topology", e.what());
  }
  config.validate();
  return config;
}

std::string report_json(const EstimationReport& r) {
  const auto& p = r.fit.params;
  std::vector<double> terms(r.decay.terms.begin(), r.decay.terms.end());
  json j = {
      {"label", r.label},
      {"model", to_string(r.model)},
      {"params", {{"alpha", p.alpha}, {"mu", p.mu}, {"sigma", p.sigma}}},
      {"k_fit", r.fit.k_fit},
      {"residual_count", r.fit.residuals.size()},
      {"decay",
       {{"ratio", array_of(r.decay.ratio)},
        {"ratio_stderr", array_of(r.decay.ratio_stderr)},
        {"alpha", array_of(r.decay.alpha)},
        {"autocov", array_of(r.decay.autocov)},
        {"terms", terms},
        {"guarded", r.decay.guarded}}},
      {"density_fit",
       {{"family", to_string(r.density_fit.family)},
        {"mu", nan_safe(r.density_fit.mu)},
        {"stddev", nan_safe(r.density_fit.stddev)},
        {"alpha", nan_safe(r.density_fit.alpha)},
        {"sigma", nan_safe(r.density_fit.sigma)},
        {"sse", r.density_fit.sse}}},
      {"residual_normality",
       {{"mean", r.residual_normality.mean},
        {"variance", r.residual_normality.variance},
        {"skewness", r.residual_normality.skewness},
        {"excess_kurtosis", r.residual_normality.excess_kurtosis},
        {"ks_distance", r.residual_normality.ks_distance}}}};
  return j.dump(2) + '\n';
}

void write_decay_csv(std::ostream& out, const DecayCurve& curve) {
  out << "k,ratio,ratio_stderr,alpha,autocov\n";
  for (std::size_t k = 0; k < curve.ratio.size(); ++k) {
    out << k << ',' << fmt(curve.ratio[k]) << ',' << fmt(curve.ratio_stderr[k]) << ','
        << fmt(curve.alpha[k]) << ',' << fmt(curve.autocov[k]) << '\n';
  }
}

void write_density_csv(std::ostream& out, const DensityFit& fit) {
  out << "center,observed,fitted\n";
  for (std::size_t b = 0; b < fit.histogram.density.size(); ++b) {
    const double c = fit.histogram.center(b);
    out << fmt(c) << ',' << fmt(fit.histogram.density[b]) << ',' << fmt(fit.density(c)) << '\n';
  }
}

void write_residual_histogram_csv(std::ostream& out, const Histogram& h,
                                  const NormalitySummary& normality) {
  out << "center,observed,normal\n";
  const double sd = std::sqrt(normality.variance);
  for (std::size_t b = 0; b < h.density.size(); ++b) {
    const double c = h.center(b);
    const double z = (c - normality.mean) / sd;
    const double phi = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    out << fmt(c) << ',' << fmt(h.density[b]) << ',' << fmt(phi) << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const std::vector<std::string>& labels,
                      const CorrelationMatrix& rho, const Topology* topology,
                      const std::vector<int>* router_ids) {
  out << "series";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < rho.size(); ++i) {
    out << labels.at(i);
    for (std::size_t j = 0; j < rho.size(); ++j) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.4f", rho(i, j));
      out << ',' << buf;
      if (topology && router_ids && i != j && (*router_ids)[i] >= 0 && (*router_ids)[j] >= 0 &&
          topology->adjacent((*router_ids)[i], (*router_ids)[j])) {
        out << '*';
      }
    }
    out << '\n';
  }
}

}  // namespace bwm
