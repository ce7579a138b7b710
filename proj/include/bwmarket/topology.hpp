#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bwm {

using NodeId = int;

struct Edge {
  NodeId u;
  NodeId v;  // u < v after normalization

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class TopologyError : public std::runtime_error {
 public:
  enum class Kind { Parse, SelfLoop, DuplicateEdge, OutOfRange, Disconnected };

  TopologyError(Kind kind, const std::string& what, int line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based line of the offending entry, or 0 when not tied to a line.
  int line() const noexcept { return line_; }

 private:
  Kind kind_;
  int line_;
};

/// Undirected, connected router graph with dense node ids 0..N-1.
/// Instances are always valid: construction goes through from_edges().
class Topology {
 public:
  static Topology from_edges(int node_count, std::vector<Edge> edges);

  int node_count() const noexcept { return static_cast<int>(adjacency_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Neighbors of `node` in ascending id order.
  std::span<const NodeId> neighbors(NodeId node) const { return adjacency_.at(node); }
  bool adjacent(NodeId a, NodeId b) const;
  bool contains(NodeId node) const noexcept { return node >= 0 && node < node_count(); }

 private:
  Topology() = default;

  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

/// Parses the edge-list format: first non-comment line holds N, each
/// following line one "u v" pair. '#' starts a comment.
Topology parse_topology(std::string_view text);
Topology load_topology_file(const std::filesystem::path& path);
std::string format_topology(const Topology& topology);

/// The shipped 10-router network. Its 13 links are the connected router
/// pairs of the reference correlation table, renumbered from 0.
Topology default_topology();

struct PathQuote {
  std::vector<NodeId> path;  // src first, dst last
  double est_cost = 0.0;     // cap * sum of quoted prices over path nodes
};

/// Node-weighted least-cost path. Both endpoints are priced. Among
/// equal-cost paths the lexicographically smallest node sequence wins.
/// Prices must be positive and finite, one per node.
PathQuote least_cost_path(const Topology& topology, std::span<const double> prices, NodeId src,
                          NodeId dst, double cap);

}  // namespace bwm
