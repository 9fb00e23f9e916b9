// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qeopt/common.hpp"

namespace qeopt {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

/// Undirected weighted graph on vertices 0..n-1. Edges are stored with
/// u < v; self-loops and duplicate edges are rejected at construction.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(int n, std::vector<Edge> edges, std::vector<double> node_weights = {})
      : n_(n), edges_(std::move(edges)), node_weights_(std::move(node_weights)) {
    if (n_ < 0) throw std::invalid_argument("graph: negative vertex count");
    if (!node_weights_.empty() && static_cast<int>(node_weights_.size()) != n_)
      throw std::invalid_argument("graph: node weight vector has wrong length");
    std::set<std::pair<int, int>> seen;
    for (auto& e : edges_) {
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u == e.v) throw std::invalid_argument("graph: self-loop rejected");
      if (e.u < 0 || e.v >= n_) throw std::invalid_argument("graph: edge endpoint out of range");
      if (!seen.insert({e.u, e.v}).second)
        throw std::invalid_argument("graph: duplicate edge rejected");
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
  }

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  bool has_node_weights() const { return !node_weights_.empty(); }
  const std::vector<double>& node_weights() const { return node_weights_; }

  std::vector<int> degrees() const {
    std::vector<int> d(static_cast<std::size_t>(n_), 0);
    for (const auto& e : edges_) {
      d[static_cast<std::size_t>(e.u)]++;
      d[static_cast<std::size_t>(e.v)]++;
    }
    return d;
  }

  double mean_degree() const {
    if (n_ == 0) return 0.0;
    return 2.0 * static_cast<double>(edges_.size()) / n_;
  }

  double total_weight() const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.w;
    return s;
  }

  std::vector<std::vector<std::pair<int, double>>> adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n_));
    for (const auto& e : edges_) {
      adj[static_cast<std::size_t>(e.u)].push_back({e.v, e.w});
      adj[static_cast<std::size_t>(e.v)].push_back({e.u, e.w});
    }
    return adj;
  }

  bool connected() const {
    if (n_ <= 1) return true;
    auto adj = adjacency();
    std::vector<char> vis(static_cast<std::size_t>(n_), 0);
    std::queue<int> q;
    q.push(0);
    vis[0] = 1;
    int count = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto [v, w] : adj[static_cast<std::size_t>(u)]) {
        (void)w;
        if (!vis[static_cast<std::size_t>(v)]) {
          vis[static_cast<std::size_t>(v)] = 1;
          count++;
          q.push(v);
        }
      }
    }
    return count == n_;
  }

  /// Length of the shortest cycle, or 0 if the graph is a forest.
  int girth() const {
    auto adj = adjacency();
    int best = 0;
    for (int s = 0; s < n_; ++s) {
      std::vector<int> dist(static_cast<std::size_t>(n_), -1), parent(static_cast<std::size_t>(n_), -1);
      std::queue<int> q;
      dist[static_cast<std::size_t>(s)] = 0;
      q.push(s);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [v, w] : adj[static_cast<std::size_t>(u)]) {
          (void)w;
          if (dist[static_cast<std::size_t>(v)] < 0) {
            dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
            parent[static_cast<std::size_t>(v)] = u;
            q.push(v);
          } else if (v != parent[static_cast<std::size_t>(u)]) {
            int cyc = dist[static_cast<std::size_t>(u)] + dist[static_cast<std::size_t>(v)] + 1;
            if (best == 0 || cyc < best) best = cyc;
          }
        }
      }
    }
    return best;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> node_weights_;
};

// --- instance generators --------------------------------------------------
// All generators are pure functions of their parameters and seed.

inline WeightedGraph make_line_graph(int n) {
  if (n < 1) throw std::invalid_argument("line graph: n >= 1 required");
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph make_erdos_renyi(int n, double p_edge, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("erdos_renyi: n >= 1 required");
  if (p_edge < 0.0 || p_edge > 1.0) throw std::invalid_argument("erdos_renyi: edge probability must be in [0,1]");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uni(rng) < p_edge) edges.push_back({i, j, 1.0});
  return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph make_complete_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return WeightedGraph(n, std::move(edges));
}

/// Random d-regular simple graph: a circulant start randomized by a long
/// run of degree-preserving double-edge switches. Works for every feasible
/// (n, d) and is deterministic under the seed.
inline WeightedGraph make_random_regular(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 0) throw std::invalid_argument("random_regular: invalid parameters");
  if (d >= n) throw std::invalid_argument("random_regular: degree must be < n");
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw std::invalid_argument("random_regular: n*d must be even");
  if (d == n - 1) return make_complete_graph(n);
  if (d == 0) return WeightedGraph(n, {});

  // circulant start: offsets 1..d/2, plus the antipodal matching for odd d
  std::set<std::pair<int, int>> edge_set;
  auto add = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    edge_set.insert({a, b});
  };
  for (int k = 1; k <= d / 2; ++k)
    for (int i = 0; i < n; ++i) add(i, (i + k) % n);
  if (d % 2 == 1)
    for (int i = 0; i < n / 2; ++i) add(i, i + n / 2);

  std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  std::bernoulli_distribution coin(0.5);
  long long switches = 20LL * static_cast<long long>(edges.size());
  for (long long s = 0; s < switches; ++s) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    auto [a, b] = edges[i];
    auto [c, e] = edges[j];
    if (coin(rng)) std::swap(c, e);
    // rewire (a,b),(c,e) -> (a,c),(b,e)
    if (a == c || a == e || b == c || b == e) continue;
    auto na = std::minmax(a, c);
    auto nb = std::minmax(b, e);
    if (edge_set.count({na.first, na.second}) || edge_set.count({nb.first, nb.second})) continue;
    edge_set.erase({std::min(a, b), std::max(a, b)});
    edge_set.erase({std::min(c, e), std::max(c, e)});
    edge_set.insert({na.first, na.second});
    edge_set.insert({nb.first, nb.second});
    edges[i] = {na.first, na.second};
    edges[j] = {nb.first, nb.second};
  }
  std::vector<Edge> out;
  out.reserve(edge_set.size());
  for (auto [a, b] : edge_set) out.push_back({a, b, 1.0});
  return WeightedGraph(n, std::move(out));
}

/// Square lattice with one interior vertex removed and the vertex below it
/// merged into the hole (edge contraction). The merged vertex bridges two
/// lattice rows, creating a single domain-wall defect in the checkerboard
/// MIS solution.
inline WeightedGraph make_defect_lattice(int rows, int cols, int defect_row = -1, int defect_col = -1) {
  if (rows < 3 || cols < 3) throw std::invalid_argument("defect_lattice: at least 3x3 required");
  if (defect_row < 0) defect_row = rows / 2;
  if (defect_col < 0) defect_col = cols / 2;
  if (defect_row <= 0 || defect_row >= rows - 1 || defect_col <= 0 || defect_col >= cols - 1)
    throw std::invalid_argument("defect_lattice: defect must be an interior vertex");

  auto id = [&](int r, int c) { return r * cols + c; };
  int removed = id(defect_row, defect_col);
  int absorber = id(defect_row + 1, defect_col);  // vertex that shifts up into the hole

  std::set<std::pair<int, int>> edge_set;
  auto add = [&](int a, int b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    edge_set.insert({a, b});
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) add(id(r, c), id(r, c + 1));
      if (r + 1 < rows) add(id(r, c), id(r + 1, c));
    }
  // contract (removed, absorber): neighbors of the removed vertex re-attach
  // to the absorber, then the removed vertex disappears.
  std::set<std::pair<int, int>> contracted;
  for (auto [a, b] : edge_set) {
    if (a == removed) a = absorber;
    if (b == removed) b = absorber;
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    contracted.insert({a, b});
  }
  // compact vertex ids
  std::vector<int> remap(static_cast<std::size_t>(rows * cols), -1);
  int next = 0;
  for (int v = 0; v < rows * cols; ++v)
    if (v != removed) remap[static_cast<std::size_t>(v)] = next++;
  std::vector<Edge> edges;
  for (auto [a, b] : contracted)
    edges.push_back({remap[static_cast<std::size_t>(a)], remap[static_cast<std::size_t>(b)], 1.0});
  return WeightedGraph(next, std::move(edges));
}

/// Copy of g with edge weights drawn uniformly from [lo, hi].
inline WeightedGraph with_uniform_weights(const WeightedGraph& g, double lo, double hi, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  std::vector<Edge> edges = g.edges();
  for (auto& e : edges) e.w = uni(rng);
  return WeightedGraph(g.n(), std::move(edges),
                       g.has_node_weights() ? g.node_weights() : std::vector<double>{});
}

/// Copy of g with edge weights drawn uniformly from {-1, +1}.
inline WeightedGraph with_sign_weights(const WeightedGraph& g, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<Edge> edges = g.edges();
  for (auto& e : edges) e.w = coin(rng) ? 1.0 : -1.0;
  return WeightedGraph(g.n(), std::move(edges));
}

}  // namespace qeopt
