#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwmarket/market.hpp"
#include "bwmarket/rng.hpp"
#include "bwmarket/topology.hpp"

namespace bwm {

/// Raised by SimulationConfig::validate(); field() is the config key at fault.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raised when the engine's books stop balancing. Never recoverable.
class AccountingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Simulation parameters. Defaults are the reference experiment:
/// 10 routers, 10 users, 1000 steps of 0.01, lambda = 10, S(0) = 10.
struct SimulationConfig {
  int routers = 10;                 // N
  int users = 10;                   // M
  int steps = 1000;                 // L
  double dt = 0.01;
  int demands_per_step = 10;        // m
  int max_duration = 10;            // D
  double capacity_exponent = 2.0;   // K: cap = ceil(exp(K * xi))
  double unit_value = 100.0;        // C_unit: max = C_unit * cap
  double budget_factor = 1.0;       // C_max: buy iff est_cost < C_max * max
  std::vector<double> liquidity{10.0};     // one value, or one per router
  std::vector<double> initial_price{10.0}; // one value, or one per router
  Topology topology = default_topology();
  std::string topology_source = "default";
  std::uint64_t seed = 1;
  CashRule cash_rule = CashRule::PostImpact;

  double liquidity_of(int router) const;
  double initial_price_of(int router) const;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

enum class DemandOutcome { Rejected, Satisfied };

struct Demand {
  std::int64_t id = 0;
  int uid = 0;
  NodeId src = 0;
  NodeId dst = 0;
  std::int64_t cap = 1;
  int dur = 1;
  double max = 0.0;
  int start_step = 0;

  DemandOutcome outcome = DemandOutcome::Rejected;
  double est_cost = 0.0;
  std::vector<NodeId> path;  // empty unless satisfied
  int sell_step = -1;        // step the allocation was sold at; L for close-out
  double realized_cash = 0.0;  // max - purchase cost + sale proceeds
};

struct UserState {
  double cash = 0.0;
  std::vector<std::int64_t> holdings;  // units per router
};

/// One net order of `volume` units by `user` on `router`.
struct Order {
  int user = 0;
  int router = 0;
  std::int64_t volume = 0;
};

struct StepLog {
  int step = 0;
  std::vector<double> prices;  // last transaction price per router
  int generated = 0;
  int satisfied = 0;
  int rejected = 0;
  int sold = 0;
  int trades = 0;
  std::int64_t bids = 0;           // outbound messages, one per trade
  std::int64_t quote_updates = 0;  // inbound quote messages across all users
  std::vector<double> user_cash;
  std::vector<std::int64_t> outstanding;  // bookkept held units per router
};

struct SimulationLog {
  SimulationConfig config;
  std::vector<StepLog> records;  // exactly config.steps entries
  std::vector<Demand> demands;   // in id order
  std::vector<double> final_cash;    // per user, after close-out
  std::vector<double> final_prices;  // per router, after close-out
  int closeout_trades = 0;
};

/// Trading work for one step, produced by Simulation::prepare_step().
struct StepPlan {
  int step = 0;
  std::vector<Order> orders;  // nonzero net orders, sorted by (user, router)
  int generated = 0;
  int satisfied = 0;
  int rejected = 0;
  int sold = 0;
};

/// The discrete-time market engine.
///
/// Each step generates demands, routes them on the quotes known at the start
/// of the step, nets the resulting orders per (user, router) and executes
/// them one by one in a random order. Allocations still held after the last
/// step are sold in a final close-out round that is not part of the price log.
///
/// Per step the stream is consumed as: for each demand uid, src, dst
/// (redrawn until != src), xi, dur; then one Fisher-Yates shuffle of the
/// order list.
///
/// Copyable: a copy is an independent snapshot with its own RNG state.
class Simulation {
 public:
  explicit Simulation(SimulationConfig config);

  bool finished() const noexcept { return step_ >= config_.steps; }
  int current_step() const noexcept { return step_; }
  const SimulationConfig& config() const noexcept { return config_; }
  const std::vector<MarketState>& markets() const noexcept { return markets_; }
  const std::vector<UserState>& users() const noexcept { return users_; }
  const std::vector<Demand>& demands() const noexcept { return demands_; }
  std::vector<double> prices() const;

  /// Draws and routes this step's demands and schedules due sales.
  StepPlan prepare_step();

  /// Same, but routes the given demands instead of drawing m new ones. Ids
  /// and start steps are assigned here; max is taken as given. Consumes no
  /// randomness.
  StepPlan prepare_step(std::vector<Demand> fresh);

  /// Executes a plan. `order` is a permutation of plan.orders indices; when
  /// empty, one is drawn from the simulation's stream.
  const StepLog& commit_step(const StepPlan& plan, std::span<const std::size_t> order = {});

  const StepLog& step();

  /// Runs the remaining steps, closes the books and returns the log.
  SimulationLog finish() &&;

 private:
  struct Contribution {
    int user;
    int router;
    std::size_t demand;
    std::int64_t volume;
  };

  Demand draw_demand(int step);
  std::vector<std::size_t> draw_permutation(std::size_t n);
  int effectuate(const std::vector<Order>& orders, std::span<const std::size_t> order,
                 const std::vector<Contribution>& contributions,
                 std::span<const std::size_t> credits);
  void check_books() const;

  SimulationConfig config_;
  Rng rng_;
  std::vector<MarketState> markets_;
  std::vector<UserState> users_;
  std::vector<Demand> demands_;
  std::vector<std::size_t> active_;  // satisfied demands not yet sold
  std::vector<Contribution> pending_;  // per-demand volumes of the prepared step
  std::vector<std::size_t> accepted_;  // demands satisfied in the prepared step
  std::vector<StepLog> records_;
  int step_ = 0;
  bool prepared_ = false;
};

/// Draws the m demands of one step. Exposed for testing; consumes `rng`
/// exactly as the engine does.
std::vector<Demand> generate_demands(Rng& rng, const SimulationConfig& config, int step,
                                     std::int64_t first_id);

SimulationLog run(const SimulationConfig& config);

const char* to_string(DemandOutcome outcome);

}  // namespace bwm
