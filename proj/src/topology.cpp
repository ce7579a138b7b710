#include "bwmarket/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <tuple>
#include <sstream>

namespace bwm {

namespace {

using Kind = TopologyError::Kind;

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

Topology Topology::from_edges(int node_count, std::vector<Edge> edges) {
  if (node_count < 1) throw TopologyError(Kind::Parse, "topology: node count must be >= 1");

  Topology topo;
  topo.adjacency_.resize(node_count);
  for (auto& e : edges) {
    if (e.u < 0 || e.u >= node_count || e.v < 0 || e.v >= node_count) {
      throw TopologyError(Kind::OutOfRange, "topology: edge (" + std::to_string(e.u) + ", " +
                                                std::to_string(e.v) + ") has id outside 0.." +
                                                std::to_string(node_count - 1));
    }
    if (e.u == e.v) {
      throw TopologyError(Kind::SelfLoop, "topology: self-loop on node " + std::to_string(e.u));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw TopologyError(Kind::DuplicateEdge, "topology: duplicate edge (" +
                                                 std::to_string(dup->u) + ", " +
                                                 std::to_string(dup->v) + ")");
  }
  for (const auto& e : edges) {
    topo.adjacency_[e.u].push_back(e.v);
    topo.adjacency_[e.v].push_back(e.u);
  }
  for (auto& nbrs : topo.adjacency_) std::sort(nbrs.begin(), nbrs.end());
  topo.edges_ = std::move(edges);

  std::vector<bool> seen(node_count, false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (NodeId m : topo.adjacency_[n]) {
      if (!seen[m]) {
        seen[m] = true;
        ++reached;
        stack.push_back(m);
      }
    }
  }
  if (reached != node_count) {
    const auto missing = std::find(seen.begin(), seen.end(), false) - seen.begin();
    throw TopologyError(Kind::Disconnected, "topology: graph is disconnected (node " +
                                                std::to_string(missing) +
                                                " unreachable from node 0)");
  }
  return topo;
}

bool Topology::adjacent(NodeId a, NodeId b) const {
  if (!contains(a) || !contains(b)) return false;
  const auto& nbrs = adjacency_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

Topology parse_topology(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  int node_count = -1;
  std::vector<Edge> edges;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (is_blank(line)) continue;

    std::istringstream fields{std::string(line)};
    if (node_count < 0) {
      long long n = 0;
      std::string extra;
      if (!(fields >> n) || (fields >> extra) || n < 1 ||
          n > std::numeric_limits<int>::max()) {
        throw TopologyError(Kind::Parse,
                            "topology: line " + std::to_string(line_no) +
                                ": expected a positive node count",
                            line_no);
      }
      node_count = static_cast<int>(n);
      continue;
    }
    long long u = 0, v = 0;
    std::string extra;
    if (!(fields >> u >> v) || (fields >> extra)) {
      throw TopologyError(Kind::Parse,
                          "topology: line " + std::to_string(line_no) + ": expected \"u v\"",
                          line_no);
    }
    if (u < 0 || v < 0 || u >= node_count || v >= node_count) {
      throw TopologyError(Kind::OutOfRange,
                          "topology: line " + std::to_string(line_no) + ": node id out of range 0.." +
                              std::to_string(node_count - 1),
                          line_no);
    }
    if (u == v) {
      throw TopologyError(Kind::SelfLoop,
                          "topology: line " + std::to_string(line_no) + ": self-loop on node " +
                              std::to_string(u),
                          line_no);
    }
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  if (node_count < 0) throw TopologyError(Kind::Parse, "topology: missing node count");
  return Topology::from_edges(node_count, std::move(edges));
}

Topology load_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("topology: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str());
}

std::string format_topology(const Topology& topology) {
  std::ostringstream out;
  out << topology.node_count() << '\n';
  for (const auto& e : topology.edges()) out << e.u << ' ' << e.v << '\n';
  return out.str();
}

Topology default_topology() {
  return Topology::from_edges(10, {{0, 1},
                                   {0, 4},
                                   {0, 5},
                                   {1, 7},
                                   {1, 9},
                                   {2, 6},
                                   {2, 8},
                                   {3, 4},
                                   {3, 5},
                                   {3, 8},
                                   {5, 9},
                                   {6, 8},
                                   {7, 8}});
}

PathQuote least_cost_path(const Topology& topology, std::span<const double> prices, NodeId src,
                          NodeId dst, double cap) {
  const int n = topology.node_count();
  if (static_cast<int>(prices.size()) != n) {
    throw std::invalid_argument("least_cost_path: price vector size does not match node count");
  }
  if (!topology.contains(src) || !topology.contains(dst)) {
    throw std::invalid_argument("least_cost_path: src/dst outside the topology");
  }
  for (double p : prices) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("least_cost_path: prices must be positive and finite");
    }
  }

  // Labels are (cost summed in path order, node sequence) compared
  // lexicographically. Equal floating-point costs fall through to the
  // sequence, so a label may improve after its node was first expanded;
  // such nodes are simply expanded again.
  struct Label {
    double cost;
    std::vector<NodeId> path;
  };
  const auto better = [](double cost, const std::vector<NodeId>& path, const Label& than) {
    return cost < than.cost || (cost == than.cost && path < than.path);
  };
  std::vector<Label> best(n, Label{std::numeric_limits<double>::infinity(), {}});
  std::vector<unsigned> version(n, 0);
  using Item = std::tuple<double, NodeId, unsigned>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  best[src] = {prices[src], {src}};
  frontier.push({best[src].cost, src, 0});
  while (!frontier.empty()) {
    const auto [cost, node, ver] = frontier.top();
    frontier.pop();
    if (ver != version[node]) continue;
    for (NodeId next : topology.neighbors(node)) {
      const auto& trail = best[node].path;
      if (std::find(trail.begin(), trail.end(), next) != trail.end()) continue;
      const double candidate = best[node].cost + prices[next];
      std::vector<NodeId> extended = trail;
      extended.push_back(next);
      if (better(candidate, extended, best[next])) {
        best[next] = {candidate, std::move(extended)};
        frontier.push({candidate, next, ++version[next]});
      }
    }
  }

  PathQuote quote;
  quote.path = std::move(best[dst].path);
  double sum = 0.0;
  for (NodeId node : quote.path) sum += prices[node];
  quote.est_cost = cap * sum;
  return quote;
}

}  // namespace bwm
