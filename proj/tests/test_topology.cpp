#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "bwmarket/topology.hpp"

using bwm::Edge;
using bwm::Topology;
using bwm::TopologyError;

namespace {

TopologyError::Kind parse_error_kind(const char* text) {
  try {
    bwm::parse_topology(text);
  } catch (const TopologyError& e) {
    return e.kind();
  }
  FAIL("expected a topology error");
  return TopologyError::Kind::Parse;
}

Topology diamond() { return Topology::from_edges(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}}); }

}  // namespace

TEST_CASE("parse: minimal path graph") {
  const Topology t = bwm::parse_topology("3\n0 1\n1 2\n");
  CHECK(t.node_count() == 3);
  CHECK(t.edges().size() == 2);
  CHECK(t.adjacent(0, 1));
  CHECK(t.adjacent(2, 1));
  CHECK_FALSE(t.adjacent(0, 2));
}

TEST_CASE("parse: comments, blank lines and reversed pairs") {
  const Topology t = bwm::parse_topology("# ring\n\n4  # nodes\n1 0\n2 1 # middle\n3 2\n0 3\n");
  CHECK(t.edges() == std::vector<Edge>{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
}

TEST_CASE("parse: rejected inputs") {
  CHECK(parse_error_kind("2\n0 0\n") == TopologyError::Kind::SelfLoop);
  CHECK(parse_error_kind("4\n0 1\n2 3\n") == TopologyError::Kind::Disconnected);
  CHECK(parse_error_kind("3\n0 1\n1 0\n1 2\n") == TopologyError::Kind::DuplicateEdge);
  CHECK(parse_error_kind("3\n0 1\n1 3\n") == TopologyError::Kind::OutOfRange);
  CHECK(parse_error_kind("3\n0 1\n1 x\n") == TopologyError::Kind::Parse);
  CHECK(parse_error_kind("3\n0 1 2\n") == TopologyError::Kind::Parse);
  CHECK(parse_error_kind("") == TopologyError::Kind::Parse);
  CHECK(parse_error_kind("0\n") == TopologyError::Kind::Parse);
}

TEST_CASE("parse: error carries the offending line") {
  try {
    bwm::parse_topology("3\n0 1\n2 2\n");
    FAIL("expected a self-loop error");
  } catch (const TopologyError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("format and parse round trip") {
  const Topology t = bwm::default_topology();
  const Topology back = bwm::parse_topology(bwm::format_topology(t));
  CHECK(back.node_count() == t.node_count());
  CHECK(back.edges() == t.edges());
}

TEST_CASE("default topology: ten routers, thirteen links, connected") {
  const Topology t = bwm::default_topology();
  CHECK(t.node_count() == 10);
  CHECK(t.edges().size() == 13);
  for (int v = 0; v < 10; ++v) CHECK_FALSE(t.neighbors(v).empty());
}

TEST_CASE("least_cost_path: path graph") {
  const Topology t = Topology::from_edges(3, {{0, 1}, {1, 2}});
  const std::vector<double> prices{1, 1, 1};
  const auto q = bwm::least_cost_path(t, prices, 0, 2, 2.0);
  CHECK(q.path == std::vector<int>{0, 1, 2});
  CHECK(q.est_cost == 6.0);
}

TEST_CASE("least_cost_path: diamond avoids the expensive branch") {
  const std::vector<double> prices{1, 5, 1, 1};
  const auto q = bwm::least_cost_path(diamond(), prices, 0, 3, 1.0);
  const auto ref = oracle::cheapest_simple_path(diamond(), prices, 0, 3, 1.0);
  CHECK(q.path == std::vector<int>{0, 2, 3});
  CHECK(q.est_cost == 3.0);
  CHECK(q.path == ref.path);
  CHECK(q.est_cost == ref.cost);
}

TEST_CASE("least_cost_path: source equals destination") {
  const std::vector<double> prices{7, 1, 1, 1};
  const auto q = bwm::least_cost_path(diamond(), prices, 0, 0, 3.0);
  CHECK(q.path == std::vector<int>{0});
  CHECK(q.est_cost == 21.0);
}

TEST_CASE("least_cost_path: equal costs resolve to the smallest node sequence") {
  const std::vector<double> prices{1, 1, 1, 1};
  CHECK(bwm::least_cost_path(diamond(), prices, 0, 3, 1.0).path == std::vector<int>{0, 1, 3});
  CHECK(bwm::least_cost_path(diamond(), prices, 3, 0, 1.0).path == std::vector<int>{3, 1, 0});
}

TEST_CASE("least_cost_path: invalid arguments") {
  const std::vector<double> prices{1, 1, 1, 1};
  const std::vector<double> short_prices{1, 1};
  const std::vector<double> zero_price{1, 0, 1, 1};
  CHECK_THROWS_AS(bwm::least_cost_path(diamond(), short_prices, 0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bwm::least_cost_path(diamond(), zero_price, 0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bwm::least_cost_path(diamond(), prices, 0, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bwm::least_cost_path(diamond(), prices, -1, 3, 1.0), std::invalid_argument);
}

TEST_CASE("least_cost_path matches exhaustive enumeration on small graphs") {
  std::mt19937_64 gen(20240601);
  std::lognormal_distribution<double> price(2.0, 1.5);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 7);
    const Topology t = oracle::random_connected_graph(gen, n, 0.35);
    std::vector<double> prices(static_cast<std::size_t>(n));
    for (auto& p : prices) p = price(gen);
    if (trial % 5 == 0) std::fill(prices.begin(), prices.end(), 3.0);
    for (int s = 0; s < n; ++s) {
      for (int d = 0; d < n; ++d) {
        const auto q = bwm::least_cost_path(t, prices, s, d, 4.0);
        const auto ref = oracle::cheapest_simple_path(t, prices, s, d, 4.0);
        REQUIRE(q.est_cost == ref.cost);
        REQUIRE(q.path == ref.path);
        for (std::size_t i = 1; i < q.path.size(); ++i) REQUIRE(t.adjacent(q.path[i - 1], q.path[i]));
        ++checked;
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("uniform prices give a fewest-hop path") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Topology t = oracle::random_connected_graph(gen, 8, 0.2);
    const std::vector<double> prices(8, 2.5);
    for (int d = 1; d < 8; ++d) {
      std::vector<int> hops(8, -1);
      std::vector<int> queue{0};
      hops[0] = 0;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (int next : t.neighbors(queue[head])) {
          if (hops[static_cast<std::size_t>(next)] >= 0) continue;
          hops[static_cast<std::size_t>(next)] = hops[static_cast<std::size_t>(queue[head])] + 1;
          queue.push_back(next);
        }
      }
      const auto q = bwm::least_cost_path(t, prices, 0, d, 1.0);
      CHECK(static_cast<int>(q.path.size()) == hops[static_cast<std::size_t>(d)] + 1);
    }
  }
}

TEST_CASE("edge order in the input does not change routing") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> price(1.0, 20.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Topology t = oracle::random_connected_graph(gen, 7, 0.4);
    std::vector<Edge> shuffled = t.edges();
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    for (auto& e : shuffled)
      if (gen() % 2) std::swap(e.u, e.v);
    const Topology relabelled = Topology::from_edges(7, shuffled);
    std::vector<double> prices(7);
    for (auto& p : prices) p = price(gen);
    for (int s = 0; s < 7; ++s) {
      for (int d = 0; d < 7; ++d) {
        const auto a = bwm::least_cost_path(t, prices, s, d, 2.0);
        const auto b = bwm::least_cost_path(relabelled, prices, s, d, 2.0);
        CHECK(a.path == b.path);
        CHECK(a.est_cost == b.est_cost);
      }
    }
  }
}

TEST_CASE("routing survives extreme price spreads") {
  const Topology t = bwm::default_topology();
  std::vector<double> prices{4.3e16, 2.0, 1e-12, 3.0, 7e30, 1.0, 5.0, 1e8, 9.0, 0.5};
  for (int s = 0; s < 10; ++s) {
    for (int d = 0; d < 10; ++d) {
      const auto q = bwm::least_cost_path(t, prices, s, d, 8.0);
      const auto ref = oracle::cheapest_simple_path(t, prices, s, d, 8.0);
      // Absorption makes many paths tie in floating point; only the cost is pinned.
      CHECK(q.est_cost == ref.cost);
      REQUIRE(!q.path.empty());
      CHECK(q.path.front() == s);
      CHECK(q.path.back() == d);
      double sum = 0.0;
      for (std::size_t i = 0; i < q.path.size(); ++i) {
        sum += prices[static_cast<std::size_t>(q.path[i])];
        if (i > 0) CHECK(t.adjacent(q.path[i - 1], q.path[i]));
      }
      CHECK(8.0 * sum == q.est_cost);
    }
  }
}
