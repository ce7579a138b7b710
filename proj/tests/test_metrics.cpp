#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "bwmarket/metrics.hpp"

using bwm::Demand;
using bwm::Simulation;
using bwm::SimulationConfig;

namespace {

SimulationConfig path_config(double liquidity) {
  SimulationConfig c;
  c.routers = 3;
  c.users = 2;
  c.steps = 4;
  c.demands_per_step = 0;
  c.liquidity = {liquidity};
  c.topology = bwm::Topology::from_edges(3, {{0, 1}, {1, 2}});
  c.topology_source = "path";
  return c;
}

bwm::SimulationLog single_demand_run(double liquidity, std::int64_t cap) {
  Simulation sim(path_config(liquidity));
  Demand d;
  d.uid = 1;
  d.src = 0;
  d.dst = 2;
  d.cap = cap;
  d.dur = 2;
  d.max = 100.0 * static_cast<double>(cap);
  sim.commit_step(sim.prepare_step({d}));
  return std::move(sim).finish();
}

double mean_success(SimulationConfig c, int seeds) {
  double total = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    total += bwm::success_ratio(bwm::run(c));
  }
  return total / seeds;
}

double mean_profit(SimulationConfig c, int seeds) {
  double total = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    total += bwm::net_profit(bwm::run(c)).mean_per_user;
  }
  return total / seeds;
}

}  // namespace

TEST_CASE("success ratio extremes") {
  SimulationConfig c;
  c.steps = 100;
  c.budget_factor = 0.0;
  CHECK(bwm::success_ratio(bwm::run(c)) == 0.0);

  c.budget_factor = 1.0;
  c.liquidity = {1e9};
  c.unit_value = 1e6;
  CHECK(bwm::success_ratio(bwm::run(c)) == 1.0);

  c.demands_per_step = 0;
  CHECK_THROWS_AS(bwm::success_ratio(bwm::run(c)), std::domain_error);
}

TEST_CASE("no demands, no profit, no load") {
  SimulationConfig c;
  c.steps = 30;
  c.demands_per_step = 0;
  const auto log = bwm::run(c);
  const auto p = bwm::net_profit(log);
  CHECK(p.per_user == std::vector<double>(10, 0.0));
  CHECK(p.mean_per_user == 0.0);
  CHECK(p.mean_per_demand == 0.0);
  for (const auto& row : bwm::load_series(log))
    for (double v : row) CHECK(v == 0.0);
  CHECK(bwm::message_summary(log).trades == 0);
}

TEST_CASE("deep market: the round trip costs almost nothing") {
  const auto log = single_demand_run(1e9, 1);
  const auto p = bwm::net_profit(log);
  CHECK(p.per_user[0] == 0.0);
  CHECK(p.per_user[1] == doctest::Approx(100.0).epsilon(1e-8));
  CHECK(p.mean_per_demand == doctest::Approx(100.0).epsilon(1e-8));
  CHECK(log.demands[0].realized_cash == doctest::Approx(100.0).epsilon(1e-8));
}

TEST_CASE("shallow market: the round trip pays the impact twice") {
  const auto log = single_demand_run(10.0, 2);
  // Buy 2 units at 10 e^{0.2}, sell back at 10.
  CHECK(bwm::net_profit(log).per_user[1] ==
        doctest::Approx(200.0 - 3.0 * 2.0 * 10.0 * std::exp(0.2) + 3.0 * 2.0 * 10.0));
}

TEST_CASE("implied load after one trade of five units") {
  const auto log = single_demand_run(10.0, 5);
  const auto loads = bwm::load_series(log);
  REQUIRE(loads.size() == 5);
  for (double v : loads[0]) CHECK(v == 0.0);
  for (double v : loads[1]) CHECK(v == doctest::Approx(5.0).epsilon(1e-14));
  for (double v : loads[2]) CHECK(v == doctest::Approx(5.0).epsilon(1e-14));
  for (double v : loads[3]) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("implied load equals bookkept volume on full runs") {
  for (double lambda : {1.0, 10.0, 100.0}) {
    SimulationConfig c;
    c.liquidity = {lambda};
    const auto log = bwm::run(c);
    CHECK(bwm::max_load_discrepancy(log) < 1e-9);
    const auto loads = bwm::load_series(log);
    for (std::size_t t = 0; t < log.records.size(); t += 97) {
      const double implied = std::accumulate(loads[t + 1].begin(), loads[t + 1].end(), 0.0);
      const auto& held = log.records[t].outstanding;
      CHECK(implied == doctest::Approx(static_cast<double>(std::accumulate(held.begin(), held.end(), std::int64_t{0}))));
    }
  }
}

TEST_CASE("tighter budgets reject more") {
  for (std::uint64_t seed : {1, 2, 3}) {
    SimulationConfig c;
    c.seed = seed;
    double last = -1.0;
    for (double unit : {20.0, 100.0, 500.0}) {
      c.unit_value = unit;
      const double r = bwm::success_ratio(bwm::run(c));
      CHECK(r >= last);
      last = r;
    }
  }
}

TEST_CASE("liquidity trends across seeds") {
  SimulationConfig c;
  c.liquidity = {1.0};
  const double low = mean_success(c, 5);
  c.liquidity = {100.0};
  const double high = mean_success(c, 5);
  CHECK(high >= low);

  c.budget_factor = 64.0;
  c.liquidity = {1.0};
  const double reckless = mean_profit(c, 5);
  CHECK(reckless < 0.0);
  c.liquidity = {100.0};
  CHECK(mean_profit(c, 5) > reckless);
}

TEST_CASE("message counts stay under the per-trade bounds") {
  const auto log = bwm::run(SimulationConfig{});
  const auto m = bwm::message_summary(log);
  CHECK(m.trades > 0);
  CHECK(m.bids_per_trade <= 1.0);
  CHECK(m.quote_updates_per_trade < 10.0);
}

TEST_CASE("efficiency report row") {
  SimulationConfig c;
  c.steps = 50;
  c.seed = 7;
  c.budget_factor = 4.0;
  const auto r = bwm::efficiency_report(bwm::run(c));
  CHECK(r.liquidity == 10.0);
  CHECK(r.budget_factor == 4.0);
  CHECK(r.seed == 7);
  CHECK(r.demands == 500);
  CHECK(r.success_ratio == doctest::Approx(static_cast<double>(r.satisfied) / 500.0));
  const std::string row = bwm::efficiency_csv_row(r);
  CHECK(row.rfind("10,4,7,500,", 0) == 0);
  const std::string header = bwm::efficiency_csv_header();
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
}
