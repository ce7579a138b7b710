#include "bwmarket/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace bwm {

namespace {

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

std::string shortest(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_per_router(const std::vector<double>& values, int routers, const char* field,
                      const char* what) {
  if (values.size() != 1 && values.size() != static_cast<std::size_t>(routers)) {
    throw ConfigError(field, std::string(what) + " needs 1 or N=" + std::to_string(routers) +
                                 " values, got " + std::to_string(values.size()));
  }
  for (double v : values) {
    if (!positive_finite(v)) {
      throw ConfigError(field, std::string(what) + " must be positive, got " + shortest(v));
    }
  }
}

}  // namespace

double SimulationConfig::liquidity_of(int router) const {
  return liquidity.size() == 1 ? liquidity.front() : liquidity.at(router);
}

double SimulationConfig::initial_price_of(int router) const {
  return initial_price.size() == 1 ? initial_price.front() : initial_price.at(router);
}

void SimulationConfig::validate() const {
  if (routers < 2) throw ConfigError("N", "need at least 2 routers");
  if (users < 1) throw ConfigError("M", "need at least 1 user");
  if (steps < 1) throw ConfigError("L", "need at least 1 step");
  if (!positive_finite(dt)) throw ConfigError("dt", "time step must be positive");
  if (demands_per_step < 0) throw ConfigError("m", "demand count must be >= 0");
  if (max_duration < 1) throw ConfigError("D", "maximum duration must be >= 1");
  if (!(capacity_exponent >= 0.0) || capacity_exponent > 700.0) {
    throw ConfigError("K", "capacity exponent must lie in [0, 700]");
  }
  if (!positive_finite(unit_value)) throw ConfigError("C_unit", "unit value must be positive");
  if (!(budget_factor >= 0.0) || !std::isfinite(budget_factor)) {
    throw ConfigError("C_max", "budget factor must be >= 0");
  }
  check_per_router(liquidity, routers, "lambda", "liquidity");
  check_per_router(initial_price, routers, "S0", "initial price");
  if (topology.node_count() != routers) {
    throw ConfigError("topology", "topology has " + std::to_string(topology.node_count()) +
                                      " nodes but N=" + std::to_string(routers));
  }
}

const char* to_string(DemandOutcome outcome) {
  return outcome == DemandOutcome::Satisfied ? "satisfied" : "rejected";
}

std::vector<Demand> generate_demands(Rng& rng, const SimulationConfig& config, int step,
                                     std::int64_t first_id) {
  std::vector<Demand> out;
  out.reserve(config.demands_per_step);
  for (int k = 0; k < config.demands_per_step; ++k) {
    Demand d;
    d.id = first_id + k;
    d.start_step = step;
    d.uid = static_cast<int>(rng.uniform_index(config.users));
    d.src = static_cast<NodeId>(rng.uniform_index(config.routers));
    do {
      d.dst = static_cast<NodeId>(rng.uniform_index(config.routers));
    } while (d.dst == d.src);
    const double xi = rng.uniform01();
    d.cap = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(std::exp(config.capacity_exponent * xi))));
    d.dur = static_cast<int>(rng.uniform_int(1, config.max_duration));
    d.max = config.unit_value * static_cast<double>(d.cap);
    out.push_back(std::move(d));
  }
  return out;
}

Simulation::Simulation(SimulationConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  markets_.reserve(config_.routers);
  for (int j = 0; j < config_.routers; ++j) {
    markets_.emplace_back(config_.initial_price_of(j), config_.liquidity_of(j));
  }
  users_.assign(config_.users, UserState{0.0, std::vector<std::int64_t>(config_.routers, 0)});
  records_.reserve(config_.steps);
}

std::vector<double> Simulation::prices() const {
  std::vector<double> out;
  out.reserve(markets_.size());
  for (const auto& m : markets_) out.push_back(m.price());
  return out;
}

StepPlan Simulation::prepare_step() {
  if (finished()) throw std::logic_error("simulation: no steps left");
  if (prepared_) throw std::logic_error("simulation: step already prepared");
  return prepare_step(
      generate_demands(rng_, config_, step_, static_cast<std::int64_t>(demands_.size())));
}

StepPlan Simulation::prepare_step(std::vector<Demand> fresh) {
  if (finished()) throw std::logic_error("simulation: no steps left");
  if (prepared_) throw std::logic_error("simulation: step already prepared");

  const std::vector<double> quotes = prices();
  StepPlan plan;
  plan.step = step_;
  pending_.clear();
  accepted_.clear();

  for (auto& d : fresh) {
    d.id = static_cast<std::int64_t>(demands_.size() + (&d - fresh.data()));
    d.start_step = step_;
    if (d.uid < 0 || d.uid >= config_.users || d.cap < 1 || d.dur < 1) {
      throw std::invalid_argument("simulation: malformed demand");
    }
  }
  plan.generated = static_cast<int>(fresh.size());
  for (auto& d : fresh) {
    const PathQuote quote =
        least_cost_path(config_.topology, quotes, d.src, d.dst, static_cast<double>(d.cap));
    d.est_cost = quote.est_cost;
    const std::size_t index = demands_.size();
    if (quote.est_cost < config_.budget_factor * d.max) {
      d.outcome = DemandOutcome::Satisfied;
      d.path = quote.path;
      for (NodeId j : d.path) pending_.push_back({d.uid, j, index, d.cap});
      active_.push_back(index);
      accepted_.push_back(index);
      ++plan.satisfied;
    } else {
      ++plan.rejected;
    }
    demands_.push_back(std::move(d));
  }

  std::erase_if(active_, [&](std::size_t index) {
    Demand& d = demands_[index];
    if (d.start_step == step_ || d.start_step + d.dur != step_) return false;
    for (NodeId j : d.path) pending_.push_back({d.uid, j, index, -d.cap});
    d.sell_step = step_;
    ++plan.sold;
    return true;
  });

  std::vector<std::int64_t> net(static_cast<std::size_t>(config_.users) * config_.routers, 0);
  for (const auto& c : pending_) net[static_cast<std::size_t>(c.user) * config_.routers + c.router] += c.volume;
  for (int i = 0; i < config_.users; ++i) {
    for (int j = 0; j < config_.routers; ++j) {
      const auto v = net[static_cast<std::size_t>(i) * config_.routers + j];
      if (v != 0) plan.orders.push_back({i, j, v});
    }
  }
  prepared_ = true;
  return plan;
}

std::vector<std::size_t> Simulation::draw_permutation(std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng_.uniform_index(i)]);
  }
  return perm;
}

int Simulation::effectuate(const std::vector<Order>& orders, std::span<const std::size_t> order,
                           const std::vector<Contribution>& contributions,
                           std::span<const std::size_t> credits) {
  const auto routers = static_cast<std::size_t>(config_.routers);
  std::vector<double> settle(static_cast<std::size_t>(config_.users) * routers);
  for (std::size_t i = 0; i < settle.size(); ++i) settle[i] = markets_[i % routers].price();

  double cash_before = 0.0;
  double magnitude = 1.0;  // rounding scale for the balance checks
  for (const auto& u : users_) {
    cash_before += u.cash;
    magnitude += std::abs(u.cash);
  }

  double credited = 0.0;
  for (std::size_t index : credits) {
    Demand& d = demands_[index];
    users_[d.uid].cash += d.max;
    d.realized_cash += d.max;
    credited += d.max;
    magnitude += d.max;
  }

  double traded_value = 0.0;
  int trades = 0;
  for (std::size_t k : order) {
    const Order& o = orders.at(k);
    MarketState& market = markets_[o.router];
    const double quote = market.price();
    const Trade trade = market.execute(static_cast<double>(o.volume), config_.cash_rule);
    const double settle_price =
        config_.cash_rule == CashRule::PostImpact ? trade.unit_price : quote;
    settle[static_cast<std::size_t>(o.user) * routers + o.router] = settle_price;
    UserState& user = users_[o.user];
    user.cash += trade.cash_delta;
    user.holdings[o.router] += o.volume;
    if (user.holdings[o.router] < 0) {
      throw AccountingError("simulation: user " + std::to_string(o.user) +
                            " holds negative units on router " + std::to_string(o.router));
    }
    traded_value += static_cast<double>(o.volume) * settle_price;
    magnitude += std::abs(static_cast<double>(o.volume) * settle_price);
    ++trades;
  }

  double attributed = 0.0;
  for (const auto& c : contributions) {
    const double flow =
        -static_cast<double>(c.volume) * settle[static_cast<std::size_t>(c.user) * routers + c.router];
    demands_[c.demand].realized_cash += flow;
    attributed += flow;
    magnitude += std::abs(flow);
  }

  double cash_after = 0.0;
  for (const auto& u : users_) cash_after += u.cash;
  const double change = cash_after - cash_before;
  const double expected = credited - traded_value;
  if (std::abs(change - expected) > 1e-9 * magnitude ||
      std::abs(attributed + credited - expected) > 1e-9 * magnitude) {
    throw AccountingError("simulation: cash does not balance at step " + std::to_string(step_));
  }
  return trades;
}

void Simulation::check_books() const {
  std::vector<std::int64_t> expected(static_cast<std::size_t>(config_.users) * config_.routers, 0);
  for (std::size_t index : active_) {
    const Demand& d = demands_[index];
    for (NodeId j : d.path) expected[static_cast<std::size_t>(d.uid) * config_.routers + j] += d.cap;
  }
  for (int i = 0; i < config_.users; ++i) {
    for (int j = 0; j < config_.routers; ++j) {
      if (users_[i].holdings[j] != expected[static_cast<std::size_t>(i) * config_.routers + j]) {
        throw AccountingError("simulation: holdings of user " + std::to_string(i) +
                              " on router " + std::to_string(j) +
                              " disagree with active allocations");
      }
    }
  }
}

const StepLog& Simulation::commit_step(const StepPlan& plan, std::span<const std::size_t> order) {
  if (!prepared_ || plan.step != step_) {
    throw std::logic_error("simulation: commit without a matching prepare");
  }
  std::vector<std::size_t> drawn;
  if (order.empty() && !plan.orders.empty()) {
    drawn = draw_permutation(plan.orders.size());
    order = drawn;
  } else {
    std::vector<std::size_t> sorted(order.begin(), order.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted.size() != plan.orders.size() || sorted[i] != i) {
        throw std::invalid_argument("simulation: effectuation order is not a permutation");
      }
    }
  }

  const int trades = effectuate(plan.orders, order, pending_, accepted_);
  check_books();

  StepLog log;
  log.step = step_;
  log.prices = prices();
  log.generated = plan.generated;
  log.satisfied = plan.satisfied;
  log.rejected = plan.rejected;
  log.sold = plan.sold;
  log.trades = trades;
  log.bids = trades;
  log.quote_updates = static_cast<std::int64_t>(trades) * (config_.users - 1);
  log.user_cash.reserve(users_.size());
  for (const auto& u : users_) log.user_cash.push_back(u.cash);
  log.outstanding.assign(config_.routers, 0);
  for (const auto& u : users_) {
    for (int j = 0; j < config_.routers; ++j) log.outstanding[j] += u.holdings[j];
  }
  records_.push_back(std::move(log));
  pending_.clear();
  accepted_.clear();
  prepared_ = false;
  ++step_;
  return records_.back();
}

const StepLog& Simulation::step() {
  const StepPlan plan = prepare_step();
  return commit_step(plan);
}

SimulationLog Simulation::finish() && {
  if (prepared_) throw std::logic_error("simulation: finish with an uncommitted step");
  while (!finished()) step();

  // Close-out: everything still held is sold after the last logged step.
  pending_.clear();
  for (std::size_t index : active_) {
    Demand& d = demands_[index];
    for (NodeId j : d.path) pending_.push_back({d.uid, j, index, -d.cap});
    d.sell_step = config_.steps;
  }
  active_.clear();
  std::vector<std::int64_t> net(static_cast<std::size_t>(config_.users) * config_.routers, 0);
  for (const auto& c : pending_) net[static_cast<std::size_t>(c.user) * config_.routers + c.router] += c.volume;
  std::vector<Order> orders;
  for (int i = 0; i < config_.users; ++i) {
    for (int j = 0; j < config_.routers; ++j) {
      const auto v = net[static_cast<std::size_t>(i) * config_.routers + j];
      if (v != 0) orders.push_back({i, j, v});
    }
  }
  const auto perm = draw_permutation(orders.size());
  SimulationLog log;
  log.closeout_trades = effectuate(orders, perm, pending_, {});
  pending_.clear();
  check_books();

  log.config = std::move(config_);
  log.records = std::move(records_);
  log.demands = std::move(demands_);
  for (const auto& u : users_) log.final_cash.push_back(u.cash);
  for (const auto& m : markets_) log.final_prices.push_back(m.price());
  return log;
}

SimulationLog run(const SimulationConfig& config) { return Simulation(config).finish(); }

}  // namespace bwm
