#pragma once

// Reference implementations used only by the tests. Each is written for
// clarity rather than speed and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "bwmarket/topology.hpp"

namespace oracle {

struct Route {
  std::vector<int> path;
  double cost = std::numeric_limits<double>::infinity();
};

// Exhaustive enumeration of simple paths; ties go to the lexicographically
// smallest node sequence.
inline Route cheapest_simple_path(const bwm::Topology& topo, const std::vector<double>& prices,
                                  int src, int dst, double cap) {
  Route best;
  std::vector<int> trail{src};
  std::vector<bool> seen(static_cast<std::size_t>(topo.node_count()), false);
  seen[static_cast<std::size_t>(src)] = true;
  std::function<void(int)> walk = [&](int node) {
    if (node == dst) {
      double sum = 0.0;
      for (int v : trail) sum += prices[static_cast<std::size_t>(v)];
      const double cost = cap * sum;
      if (cost < best.cost || (cost == best.cost && trail < best.path)) {
        best.cost = cost;
        best.path = trail;
      }
      return;
    }
    for (const auto& e : topo.edges()) {
      int next = -1;
      if (e.u == node) next = e.v;
      if (e.v == node) next = e.u;
      if (next < 0 || seen[static_cast<std::size_t>(next)]) continue;
      seen[static_cast<std::size_t>(next)] = true;
      trail.push_back(next);
      walk(next);
      trail.pop_back();
      seen[static_cast<std::size_t>(next)] = false;
    }
  };
  walk(src);
  return best;
}

// Random connected graph: a random spanning tree plus extra edges.
inline bwm::Topology random_connected_graph(std::mt19937_64& gen, int nodes, double extra_prob) {
  std::vector<bwm::Edge> edges;
  std::vector<bool> taken(static_cast<std::size_t>(nodes * nodes), false);
  auto add = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == b || taken[static_cast<std::size_t>(a * nodes + b)]) return;
    taken[static_cast<std::size_t>(a * nodes + b)] = true;
    edges.push_back({a, b});
  };
  for (int v = 1; v < nodes; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    add(parent(gen), v);
  }
  std::bernoulli_distribution coin(extra_prob);
  for (int a = 0; a < nodes; ++a)
    for (int b = a + 1; b < nodes; ++b)
      if (coin(gen)) add(a, b);
  std::shuffle(edges.begin(), edges.end(), gen);
  return bwm::Topology::from_edges(nodes, edges);
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_rule(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Composite 20-point Gauss-Legendre over equal panels.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int panels = 400) {
  static const auto rule = gauss_legendre_rule(20);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.first.size(); ++i) {
      part += rule.second[i] * f(mid + 0.5 * h * rule.first[i]);
    }
    total += 0.5 * h * part;
  }
  return total;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

// Kolmogorov-Smirnov distance of a sample to a reference CDF.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f),
                  std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

}  // namespace oracle
