// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Qubit mapping and swap-network routing for one QAOA cost layer. A problem
// edge (a "term") can execute only when its two logical endpoints sit on
// hardware-adjacent qubits; the routers insert swaps until every term has
// executed. Both routers steer by the distance measure
//   D = sum over pending terms of d(T)^q,
// d(T) being the hardware shortest-path distance between a term's endpoints.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qeopt/graph.hpp"
#include "qeopt/common.hpp"

namespace qeopt {

/// Hardware coupling graph with a precomputed all-pairs distance matrix.
class HardwareGraph {
 public:
  HardwareGraph() = default;

  HardwareGraph(int q, std::vector<std::pair<int, int>> edges) : q_(q) {
    std::set<std::pair<int, int>> seen;
    for (auto& [a, b] : edges) {
      if (a > b) std::swap(a, b);
      if (a == b || a < 0 || b >= q_) throw std::invalid_argument("hardware graph: bad edge");
      if (!seen.insert({a, b}).second) throw std::invalid_argument("hardware graph: duplicate edge");
    }
    edges_.assign(seen.begin(), seen.end());
    adj_.resize(static_cast<std::size_t>(q_));
    for (auto [a, b] : edges_) {
      adj_[static_cast<std::size_t>(a)].push_back(b);
      adj_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
    build_distances();
  }

  int qubits() const { return q_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
  int distance(int a, int b) const { return dist_[static_cast<std::size_t>(a) * q_ + b]; }
  int diameter() const { return diameter_; }

  bool adjacent(int a, int b) const { return distance(a, b) == 1; }

 private:
  void build_distances() {
    dist_.assign(static_cast<std::size_t>(q_) * q_, -1);
    for (int s = 0; s < q_; ++s) {
      auto* row = &dist_[static_cast<std::size_t>(s) * q_];
      std::deque<int> fifo{s};
      row[s] = 0;
      while (!fifo.empty()) {
        int u = fifo.front();
        fifo.pop_front();
        for (int v : adj_[static_cast<std::size_t>(u)])
          if (row[v] < 0) {
            row[v] = row[u] + 1;
            fifo.push_back(v);
          }
      }
      for (int v = 0; v < q_; ++v) {
        if (row[v] < 0) throw std::invalid_argument("hardware graph must be connected");
        diameter_ = std::max(diameter_, row[v]);
      }
    }
  }

  int q_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> dist_;
  int diameter_ = 0;
};

inline HardwareGraph make_grid_topology(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid topology: positive dimensions required");
  std::vector<std::pair<int, int>> edges;
  auto id = [&](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
    }
  return HardwareGraph(rows * cols, std::move(edges));
}

/// 156-qubit heavy-hex lattice: 8 rows of 16 qubits joined by 4 bridge
/// qubits per gap, bridge columns alternating {2,6,10,14} / {0,4,8,12}
/// so the faces are the usual 12-qubit heavy hexagons.
inline HardwareGraph make_heavyhex156() {
  const int rows = 8, cols = 16;
  std::vector<std::pair<int, int>> edges;
  auto id = [&](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) edges.push_back({id(r, c), id(r, c + 1)});
  int next = rows * cols;
  for (int gap = 0; gap + 1 < rows; ++gap) {
    int offset = (gap % 2 == 0) ? 2 : 0;
    for (int k = 0; k < 4; ++k) {
      int c = offset + 4 * k;
      edges.push_back({id(gap, c), next});
      edges.push_back({next, id(gap + 1, c)});
      ++next;
    }
  }
  return HardwareGraph(next, std::move(edges));
}

inline nlohmann::json hardware_to_json(const HardwareGraph& h) {
  nlohmann::json j;
  j["q"] = h.qubits();
  nlohmann::json e = nlohmann::json::array();
  for (auto [a, b] : h.edges()) e.push_back({a, b});
  j["edges"] = e;
  return j;
}

inline HardwareGraph hardware_from_json(const nlohmann::json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  return HardwareGraph(j.at("q").get<int>(), std::move(edges));
}

/// Injective assignment of logical problem vertices to physical qubits.
struct QubitMapping {
  std::vector<int> log_to_phys;  // size n
  std::vector<int> phys_to_log;  // size q, -1 when unoccupied

  static QubitMapping identity(int n, int q) {
    QubitMapping m;
    m.log_to_phys.resize(static_cast<std::size_t>(n));
    m.phys_to_log.assign(static_cast<std::size_t>(q), -1);
    for (int i = 0; i < n; ++i) {
      m.log_to_phys[static_cast<std::size_t>(i)] = i;
      m.phys_to_log[static_cast<std::size_t>(i)] = i;
    }
    return m;
  }

  static QubitMapping from_assignment(const std::vector<int>& log_to_phys, int q) {
    QubitMapping m;
    m.log_to_phys = log_to_phys;
    m.phys_to_log.assign(static_cast<std::size_t>(q), -1);
    for (std::size_t v = 0; v < log_to_phys.size(); ++v) {
      int ph = log_to_phys[v];
      if (ph < 0 || ph >= q) throw std::invalid_argument("mapping: physical index out of range");
      if (m.phys_to_log[static_cast<std::size_t>(ph)] >= 0)
        throw std::invalid_argument("mapping: not injective");
      m.phys_to_log[static_cast<std::size_t>(ph)] = static_cast<int>(v);
    }
    return m;
  }

  int n() const { return static_cast<int>(log_to_phys.size()); }

  void apply_swap(int a, int b) {
    int la = phys_to_log[static_cast<std::size_t>(a)];
    int lb = phys_to_log[static_cast<std::size_t>(b)];
    std::swap(phys_to_log[static_cast<std::size_t>(a)], phys_to_log[static_cast<std::size_t>(b)]);
    if (la >= 0) log_to_phys[static_cast<std::size_t>(la)] = b;
    if (lb >= 0) log_to_phys[static_cast<std::size_t>(lb)] = a;
  }

  bool operator==(const QubitMapping& o) const {
    return log_to_phys == o.log_to_phys && phys_to_log == o.phys_to_log;
  }
};

enum class EventKind { Swap, Interaction, MergedSwapInteraction };

/// One scheduled operation on a physical edge. Interactions carry the id of
/// the problem term they implement. A merged event applies the term's phase
/// and then swaps the two qubits (the two operations commute on the same
/// edge, and together cost 3 CNOTs instead of 5).
struct CircuitEvent {
  EventKind kind;
  int a = 0;
  int b = 0;
  int term = -1;
};

struct CircuitMetrics {
  long long swaps = 0;
  long long cnots = 0;
  long long depth = 0;
};

struct RoutedCircuit {
  std::vector<CircuitEvent> events;
  QubitMapping initial;
  QubitMapping final;
  bool beam_fallback = false;  // set when A* gave up and the greedy result is returned
};

/// Swap count (merged events count once), CNOT accounting with
/// swap=3 / interaction=2 / merged=3, and two-qubit depth via greedy
/// qubit-disjoint layering.
inline CircuitMetrics circuit_metrics(const RoutedCircuit& c) {
  CircuitMetrics m;
  std::map<int, long long> qubit_layer;
  for (const auto& e : c.events) {
    switch (e.kind) {
      case EventKind::Swap:
        m.swaps += 1;
        m.cnots += 3;
        break;
      case EventKind::Interaction:
        m.cnots += 2;
        break;
      case EventKind::MergedSwapInteraction:
        m.swaps += 1;
        m.cnots += 3;
        break;
    }
    long long layer = std::max(qubit_layer[e.a], qubit_layer[e.b]) + 1;
    qubit_layer[e.a] = layer;
    qubit_layer[e.b] = layer;
    m.depth = std::max(m.depth, layer);
  }
  return m;
}

namespace routing_detail {

struct Term {
  int u = 0;
  int v = 0;
  int id = 0;
};

inline std::vector<Term> terms_of(const WeightedGraph& g) {
  std::vector<Term> terms;
  terms.reserve(g.edges().size());
  for (std::size_t i = 0; i < g.edges().size(); ++i)
    terms.push_back({g.edges()[i].u, g.edges()[i].v, static_cast<int>(i)});
  return terms;
}

inline void check_mapping(const WeightedGraph& g, const HardwareGraph& h, const QubitMapping& m) {
  if (m.n() != g.n()) throw std::invalid_argument("routing: mapping covers wrong vertex count");
  if (static_cast<int>(m.phys_to_log.size()) != h.qubits())
    throw std::invalid_argument("routing: mapping sized for a different hardware graph");
}

}  // namespace routing_detail

// --- layouts ---------------------------------------------------------------

/// Random injective layout; deterministic under seed.
inline QubitMapping random_layout(const WeightedGraph& g, const HardwareGraph& h, std::uint64_t seed) {
  if (g.n() > h.qubits()) throw std::invalid_argument("layout: more vertices than qubits");
  std::vector<int> phys(static_cast<std::size_t>(h.qubits()));
  std::iota(phys.begin(), phys.end(), 0);
  Rng rng = make_rng(seed);
  std::shuffle(phys.begin(), phys.end(), rng);
  phys.resize(static_cast<std::size_t>(g.n()));
  return QubitMapping::from_assignment(phys, h.qubits());
}

namespace routing_detail {

/// Backtracking search for a simple path of `want` vertices in the hardware
/// graph. Neighbor order follows Warnsdorff's rule (fewest onward moves
/// first, dead ends last) which finds snakes in grids and heavy-hex quickly.
inline std::vector<int> find_hardware_path(const HardwareGraph& h, int want, long long budget = 400000) {
  std::vector<int> starts(static_cast<std::size_t>(h.qubits()));
  std::iota(starts.begin(), starts.end(), 0);
  std::stable_sort(starts.begin(), starts.end(), [&](int a, int b) {
    return h.neighbors(a).size() < h.neighbors(b).size();
  });

  std::vector<char> visited(static_cast<std::size_t>(h.qubits()), 0);
  std::vector<int> path;
  long long steps = 0;

  std::function<bool(int)> extend = [&](int u) -> bool {
    if (++steps > budget) return false;
    visited[static_cast<std::size_t>(u)] = 1;
    path.push_back(u);
    if (static_cast<int>(path.size()) == want) return true;
    std::vector<std::pair<int, int>> next;  // (onward unvisited degree, vertex)
    for (int v : h.neighbors(u)) {
      if (visited[static_cast<std::size_t>(v)]) continue;
      int onward = 0;
      for (int w : h.neighbors(v)) onward += !visited[static_cast<std::size_t>(w)];
      next.push_back({onward == 0 ? h.qubits() : onward, v});  // dead ends last
    }
    std::sort(next.begin(), next.end());
    for (auto [deg, v] : next)
      if (extend(v)) return true;
    visited[static_cast<std::size_t>(u)] = 0;
    path.pop_back();
    return false;
  };

  for (int s : starts) {
    path.clear();
    std::fill(visited.begin(), visited.end(), 0);
    steps = 0;
    if (extend(s)) return path;
  }
  return {};
}

}  // namespace routing_detail

/// Spectral line layout: vertices ordered by their Fiedler-vector component
/// are placed along a simple hardware path. Falls back to packing along a
/// BFS chain of the hardware graph when no long enough path is found.
inline QubitMapping fiedler_layout(const WeightedGraph& g, const HardwareGraph& h) {
  if (g.n() > h.qubits()) throw std::invalid_argument("layout: more vertices than qubits");
  if (g.n() < 1) throw std::invalid_argument("layout: empty problem graph");
  if (!g.connected())
    throw std::invalid_argument("fiedler layout: problem graph must be connected");

  // unweighted Laplacian
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (const auto& e : g.edges()) {
    lap(e.u, e.u) += 1.0;
    lap(e.v, e.v) += 1.0;
    lap(e.u, e.v) -= 1.0;
    lap(e.v, e.u) -= 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) throw std::runtime_error("fiedler layout: eigensolver failed");
  Eigen::VectorXd fiedler = solver.eigenvectors().col(g.n() >= 2 ? 1 : 0);

  std::vector<int> order(static_cast<std::size_t>(g.n()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fiedler(a) < fiedler(b); });

  std::vector<int> seq = routing_detail::find_hardware_path(h, g.n());
  if (seq.empty()) {
    // greedy BFS chain packing: consecutive vertices land as close as BFS
    // order allows even though the sequence is not a simple path
    seq.reserve(static_cast<std::size_t>(g.n()));
    std::vector<char> vis(static_cast<std::size_t>(h.qubits()), 0);
    std::deque<int> fifo{0};
    vis[0] = 1;
    while (!fifo.empty() && static_cast<int>(seq.size()) < g.n()) {
      int u = fifo.front();
      fifo.pop_front();
      seq.push_back(u);
      for (int v : h.neighbors(u))
        if (!vis[static_cast<std::size_t>(v)]) {
          vis[static_cast<std::size_t>(v)] = 1;
          fifo.push_back(v);
        }
    }
  }

  std::vector<int> assignment(static_cast<std::size_t>(g.n()));
  for (int k = 0; k < g.n(); ++k)
    assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = seq[static_cast<std::size_t>(k)];
  return QubitMapping::from_assignment(assignment, h.qubits());
}

namespace routing_detail {

inline int overlap_of(const WeightedGraph& g, const HardwareGraph& h, const std::vector<int>& pos) {
  int count = 0;
  for (const auto& e : g.edges())
    if (h.adjacent(pos[static_cast<std::size_t>(e.u)], pos[static_cast<std::size_t>(e.v)])) count++;
  return count;
}

}  // namespace routing_detail

/// Quadratic-assignment layout: maximizes the number of problem edges that
/// land on hardware couplings. Exhaustive for tiny instances, otherwise a
/// seeded multi-restart local search over swaps and relocations (the padding
/// of unequal vertex sets is implicit: unoccupied qubits act as blanks).
inline QubitMapping qap_layout(const WeightedGraph& g, const HardwareGraph& h, std::uint64_t seed,
                               int restarts = 16) {
  if (g.n() > h.qubits()) throw std::invalid_argument("layout: more vertices than qubits");
  const int n = g.n(), q = h.qubits();

  double injections = 1.0;
  for (int i = 0; i < n; ++i) injections *= static_cast<double>(q - i);
  if (n <= 8 && injections <= 2.5e6) {
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    std::vector<char> used(static_cast<std::size_t>(q), 0);
    std::vector<int> best_pos;
    int best = -1;
    std::function<void(int)> rec = [&](int v) {
      if (v == n) {
        int ov = routing_detail::overlap_of(g, h, pos);
        if (ov > best) {
          best = ov;
          best_pos = pos;
        }
        return;
      }
      for (int ph = 0; ph < q; ++ph) {
        if (used[static_cast<std::size_t>(ph)]) continue;
        used[static_cast<std::size_t>(ph)] = 1;
        pos[static_cast<std::size_t>(v)] = ph;
        rec(v + 1);
        used[static_cast<std::size_t>(ph)] = 0;
      }
    };
    rec(0);
    return QubitMapping::from_assignment(best_pos, q);
  }

  auto adj = g.adjacency();
  auto vertex_gain = [&](const std::vector<int>& pos, int v, int at) {
    int s = 0;
    for (auto [u, w] : adj[static_cast<std::size_t>(v)]) {
      (void)w;
      if (pos[static_cast<std::size_t>(u)] >= 0 && h.adjacent(at, pos[static_cast<std::size_t>(u)])) s++;
    }
    return s;
  };

  std::vector<int> best_pos;
  int best = -1;
  for (int r = 0; r < restarts; ++r) {
    QubitMapping m = random_layout(g, h, derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<int> pos = m.log_to_phys;
    std::vector<int> occ = m.phys_to_log;

    auto apply_move = [&](int v, int target) {
      int cur = pos[static_cast<std::size_t>(v)];
      int other = occ[static_cast<std::size_t>(target)];
      occ[static_cast<std::size_t>(cur)] = other;
      occ[static_cast<std::size_t>(target)] = v;
      pos[static_cast<std::size_t>(v)] = target;
      if (other >= 0) pos[static_cast<std::size_t>(other)] = cur;
    };

    bool improved = true;
    while (improved) {
      improved = false;
      for (int v = 0; v < n; ++v) {
        for (int target = 0; target < q; ++target) {
          int cur = pos[static_cast<std::size_t>(v)];
          if (target == cur) continue;
          int other = occ[static_cast<std::size_t>(target)];
          // any double-counted (v, other) edge contributes equally before and
          // after the swap, so plain gain sums give the correct delta
          int before = vertex_gain(pos, v, cur) +
                       (other >= 0 ? vertex_gain(pos, other, target) : 0);
          apply_move(v, target);
          int after = vertex_gain(pos, v, target) +
                      (other >= 0 ? vertex_gain(pos, other, cur) : 0);
          if (after > before) {
            improved = true;
          } else {
            apply_move(v, cur);  // revert
          }
        }
      }
    }
    int ov = routing_detail::overlap_of(g, h, pos);
    if (ov > best) {
      best = ov;
      best_pos = pos;
    }
  }
  return QubitMapping::from_assignment(best_pos, q);
}

// --- greedy router -----------------------------------------------------------

/// Greedy distance-decay routing: implement every distance-1 term, then apply
/// the hardware swap minimizing D = sum d(T)^q when one strictly reduces it,
/// otherwise a swap moving the closest pending term along a shortest path.
/// Ties break on the lexicographically smallest physical edge.
inline RoutedCircuit greedy_route(const WeightedGraph& g, const HardwareGraph& h,
                                  const QubitMapping& m0, double q_exponent = 1.0) {
  routing_detail::check_mapping(g, h, m0);
  auto terms = routing_detail::terms_of(g);
  std::vector<char> pending(terms.size(), 1);
  std::size_t remaining = terms.size();

  // term ids incident to each logical vertex
  std::vector<std::vector<int>> by_vertex(static_cast<std::size_t>(g.n()));
  for (const auto& t : terms) {
    by_vertex[static_cast<std::size_t>(t.u)].push_back(t.id);
    by_vertex[static_cast<std::size_t>(t.v)].push_back(t.id);
  }

  RoutedCircuit out;
  out.initial = m0;
  QubitMapping m = m0;

  auto term_dist = [&](const routing_detail::Term& t) {
    return h.distance(m.log_to_phys[static_cast<std::size_t>(t.u)],
                      m.log_to_phys[static_cast<std::size_t>(t.v)]);
  };
  auto implement_ready = [&]() {
    for (const auto& t : terms) {
      if (!pending[static_cast<std::size_t>(t.id)]) continue;
      if (term_dist(t) == 1) {
        out.events.push_back({EventKind::Interaction, m.log_to_phys[static_cast<std::size_t>(t.u)],
                              m.log_to_phys[static_cast<std::size_t>(t.v)], t.id});
        pending[static_cast<std::size_t>(t.id)] = 0;
        remaining--;
      }
    }
  };

  long long guard = 10LL * std::max<std::size_t>(terms.size(), 1) * std::max(h.diameter(), 1) + 100;
  implement_ready();
  while (remaining > 0) {
    if (--guard < 0) throw std::runtime_error("greedy_route: iteration guard tripped");

    double base_d = 0.0;
    for (const auto& t : terms)
      if (pending[static_cast<std::size_t>(t.id)])
        base_d += std::pow(static_cast<double>(term_dist(t)), q_exponent);

    double best_d = base_d;
    int best_a = -1, best_b = -1;
    for (auto [a, b] : h.edges()) {
      int la = m.phys_to_log[static_cast<std::size_t>(a)];
      int lb = m.phys_to_log[static_cast<std::size_t>(b)];
      if (la < 0 && lb < 0) continue;  // swapping two idle qubits moves no term
      double delta = 0.0;
      auto add_delta = [&](int logical) {
        if (logical < 0) return;
        for (int id : by_vertex[static_cast<std::size_t>(logical)]) {
          if (!pending[static_cast<std::size_t>(id)]) continue;
          const auto& t = terms[static_cast<std::size_t>(id)];
          int pu = m.log_to_phys[static_cast<std::size_t>(t.u)];
          int pv = m.log_to_phys[static_cast<std::size_t>(t.v)];
          // skip terms touching both swapped qubits twice
          if (logical == t.v && (t.u == la || t.u == lb)) continue;
          int nu = pu == a ? b : (pu == b ? a : pu);
          int nv = pv == a ? b : (pv == b ? a : pv);
          delta += std::pow(static_cast<double>(h.distance(nu, nv)), q_exponent) -
                   std::pow(static_cast<double>(h.distance(pu, pv)), q_exponent);
        }
      };
      add_delta(la);
      add_delta(lb);
      if (base_d + delta < best_d - 1e-9) {
        best_d = base_d + delta;
        best_a = a;
        best_b = b;
      }
    }

    if (best_a < 0) {
      // fallback: move the closest pending term one step along a shortest path
      int pick = -1, pick_dist = 0;
      for (const auto& t : terms) {
        if (!pending[static_cast<std::size_t>(t.id)]) continue;
        int d = term_dist(t);
        if (pick < 0 || d < pick_dist) {
          pick = t.id;
          pick_dist = d;
        }
      }
      const auto& t = terms[static_cast<std::size_t>(pick)];
      int pu = m.log_to_phys[static_cast<std::size_t>(t.u)];
      int pv = m.log_to_phys[static_cast<std::size_t>(t.v)];
      best_a = pu;
      best_b = -1;
      for (int nb : h.neighbors(pu))
        if (h.distance(nb, pv) == pick_dist - 1) {
          best_b = nb;
          break;
        }
      if (best_b < 0) throw std::logic_error("greedy_route: no distance-reducing neighbor");
      if (best_a > best_b) std::swap(best_a, best_b);
    }

    out.events.push_back({EventKind::Swap, best_a, best_b, -1});
    m.apply_swap(best_a, best_b);
    implement_ready();
  }
  out.final = m;
  return out;
}

// --- A* router ---------------------------------------------------------------

enum class AstarCost { swaps, depth };

/// Best-first search over partial swap networks. Expanding a node applies one
/// swap (swap-count cost) or one greedily grown disjoint swap layer (depth
/// cost), then implements every term that became adjacent. The guiding
/// heuristic is h = sum d(T)^q over pending terms, as in the greedy router;
/// it is not admissible, so optimality is not guaranteed in general.
/// When `beam_limit` expansions are exhausted the greedy route is returned
/// with `beam_fallback` set.
inline RoutedCircuit astar_route(const WeightedGraph& g, const HardwareGraph& h,
                                 const QubitMapping& m0, double q_exponent = 1.0,
                                 AstarCost cost_mode = AstarCost::swaps, long long beam_limit = 50000) {
  routing_detail::check_mapping(g, h, m0);
  auto terms = routing_detail::terms_of(g);
  const std::size_t nterms = terms.size();
  std::vector<std::vector<int>> by_vertex(static_cast<std::size_t>(g.n()));
  for (const auto& t : terms) {
    by_vertex[static_cast<std::size_t>(t.u)].push_back(t.id);
    by_vertex[static_cast<std::size_t>(t.v)].push_back(t.id);
  }

  struct Node {
    QubitMapping mapping;
    std::vector<char> pending;
    std::size_t remaining = 0;
    double h_value = 0.0;
    int g_value = 0;
    int parent = -1;
    std::vector<std::pair<int, int>> swaps;  // applied on entry
    std::vector<int> implemented;            // term ids implemented on entry
  };

  auto pow_q = [&](int d) { return std::pow(static_cast<double>(d), q_exponent); };

  auto settle = [&](Node& node) {
    // implement all distance-1 terms and refresh h
    node.h_value = 0.0;
    for (const auto& t : terms) {
      if (!node.pending[static_cast<std::size_t>(t.id)]) continue;
      int d = h.distance(node.mapping.log_to_phys[static_cast<std::size_t>(t.u)],
                         node.mapping.log_to_phys[static_cast<std::size_t>(t.v)]);
      if (d == 1) {
        node.pending[static_cast<std::size_t>(t.id)] = 0;
        node.remaining--;
        node.implemented.push_back(t.id);
      } else {
        node.h_value += pow_q(d);
      }
    }
  };

  std::vector<Node> nodes;
  {
    Node root;
    root.mapping = m0;
    root.pending.assign(nterms, 1);
    root.remaining = nterms;
    settle(root);
    nodes.push_back(std::move(root));
  }

  struct Entry {
    double f;
    double h;
    long long seq;
    int parent;
    std::vector<std::pair<int, int>> swaps;
  };
  struct EntryCmp {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.f != b.f) return a.f > b.f;
      if (a.h != b.h) return a.h > b.h;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, EntryCmp> open;
  long long seq = 0;

  auto push_children = [&](int id) {
    const Node& node = nodes[static_cast<std::size_t>(id)];
    auto delta_for = [&](const QubitMapping& m, const std::vector<char>& pending, int a, int b) {
      // change in h when swapping physical qubits (a, b)
      int la = m.phys_to_log[static_cast<std::size_t>(a)];
      int lb = m.phys_to_log[static_cast<std::size_t>(b)];
      double delta = 0.0;
      auto visit = [&](int logical) {
        if (logical < 0) return;
        for (int tid : by_vertex[static_cast<std::size_t>(logical)]) {
          if (!pending[static_cast<std::size_t>(tid)]) continue;
          const auto& t = terms[static_cast<std::size_t>(tid)];
          if (logical == t.v && (t.u == la || t.u == lb)) continue;
          int pu = m.log_to_phys[static_cast<std::size_t>(t.u)];
          int pv = m.log_to_phys[static_cast<std::size_t>(t.v)];
          int nu = pu == a ? b : (pu == b ? a : pu);
          int nv = pv == a ? b : (pv == b ? a : pv);
          int dn = h.distance(nu, nv);
          delta += (dn == 1 ? 0.0 : pow_q(dn)) - pow_q(h.distance(pu, pv));
        }
      };
      visit(la);
      visit(lb);
      return delta;
    };

    if (cost_mode == AstarCost::swaps) {
      for (auto [a, b] : h.edges()) {
        int la = node.mapping.phys_to_log[static_cast<std::size_t>(a)];
        int lb = node.mapping.phys_to_log[static_cast<std::size_t>(b)];
        if (la < 0 && lb < 0) continue;
        if (node.swaps.size() == 1 && node.swaps[0] == std::make_pair(a, b)) continue;  // undo
        double child_h = node.h_value + delta_for(node.mapping, node.pending, a, b);
        open.push({node.g_value + 1 + child_h, child_h, seq++, id, {{a, b}}});
      }
    } else {
      // depth mode: children are disjoint swap layers grown greedily from a
      // seed edge; a layer is kept only when its seed is its smallest edge,
      // which deduplicates layers across seeds
      for (auto [sa, sb] : h.edges()) {
        int la = node.mapping.phys_to_log[static_cast<std::size_t>(sa)];
        int lb = node.mapping.phys_to_log[static_cast<std::size_t>(sb)];
        if (la < 0 && lb < 0) continue;
        QubitMapping m = node.mapping;
        std::vector<char> pending = node.pending;
        double child_h = node.h_value + delta_for(m, pending, sa, sb);
        std::vector<std::pair<int, int>> layer{{sa, sb}};
        std::vector<char> busy(static_cast<std::size_t>(h.qubits()), 0);
        busy[static_cast<std::size_t>(sa)] = busy[static_cast<std::size_t>(sb)] = 1;
        m.apply_swap(sa, sb);
        for (auto [a, b] : h.edges()) {
          if (std::make_pair(a, b) <= std::make_pair(sa, sb)) continue;
          if (busy[static_cast<std::size_t>(a)] || busy[static_cast<std::size_t>(b)]) continue;
          if (m.phys_to_log[static_cast<std::size_t>(a)] < 0 &&
              m.phys_to_log[static_cast<std::size_t>(b)] < 0)
            continue;
          double d = delta_for(m, pending, a, b);
          if (d < -1e-9) {
            layer.push_back({a, b});
            busy[static_cast<std::size_t>(a)] = busy[static_cast<std::size_t>(b)] = 1;
            m.apply_swap(a, b);
            child_h += d;
          }
        }
        open.push({node.g_value + 1 + child_h, child_h, seq++, id, std::move(layer)});
      }
    }
  };

  if (nodes[0].remaining == 0) {
    RoutedCircuit out;
    out.initial = m0;
    out.final = m0;
    for (int tid : nodes[0].implemented) {
      const auto& t = terms[static_cast<std::size_t>(tid)];
      out.events.push_back({EventKind::Interaction, m0.log_to_phys[static_cast<std::size_t>(t.u)],
                            m0.log_to_phys[static_cast<std::size_t>(t.v)], tid});
    }
    return out;
  }

  push_children(0);
  long long expanded = 0;
  int goal = -1;
  while (!open.empty()) {
    if (++expanded > beam_limit) break;
    Entry e = open.top();
    open.pop();
    Node child;
    child.mapping = nodes[static_cast<std::size_t>(e.parent)].mapping;
    child.pending = nodes[static_cast<std::size_t>(e.parent)].pending;
    child.remaining = nodes[static_cast<std::size_t>(e.parent)].remaining;
    child.g_value = nodes[static_cast<std::size_t>(e.parent)].g_value +
                    (cost_mode == AstarCost::swaps ? static_cast<int>(e.swaps.size()) : 1);
    child.parent = e.parent;
    child.swaps = e.swaps;
    for (auto [a, b] : e.swaps) child.mapping.apply_swap(a, b);
    settle(child);
    int id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(child));
    if (nodes[static_cast<std::size_t>(id)].remaining == 0) {
      goal = id;
      break;
    }
    push_children(id);
  }

  if (goal < 0) {
    RoutedCircuit fb = greedy_route(g, h, m0, q_exponent);
    fb.beam_fallback = true;
    return fb;
  }

  // reconstruct the event list root -> goal
  std::vector<int> chain;
  for (int id = goal; id >= 0; id = nodes[static_cast<std::size_t>(id)].parent) chain.push_back(id);
  std::reverse(chain.begin(), chain.end());
  RoutedCircuit out;
  out.initial = m0;
  QubitMapping m = m0;
  for (int id : chain) {
    const Node& node = nodes[static_cast<std::size_t>(id)];
    for (auto [a, b] : node.swaps) {
      out.events.push_back({EventKind::Swap, a, b, -1});
      m.apply_swap(a, b);
    }
    for (int tid : node.implemented) {
      const auto& t = terms[static_cast<std::size_t>(tid)];
      out.events.push_back({EventKind::Interaction, m.log_to_phys[static_cast<std::size_t>(t.u)],
                            m.log_to_phys[static_cast<std::size_t>(t.v)], tid});
    }
  }
  out.final = m;
  return out;
}

// --- swap/interaction merging -------------------------------------------

/// Fuses adjacent swap+interaction pairs on the same physical edge into
/// single merged events (3 CNOTs instead of 5). The term's phase commutes
/// with swapping its own two qubits, so both orders fuse to the same event.
inline RoutedCircuit merge_swap_zz(const RoutedCircuit& c) {
  RoutedCircuit out;
  out.initial = c.initial;
  out.final = c.final;
  out.beam_fallback = c.beam_fallback;
  const auto& ev = c.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (i + 1 < ev.size()) {
      const auto& x = ev[i];
      const auto& y = ev[i + 1];
      bool same_edge = std::minmax(x.a, x.b) == std::minmax(y.a, y.b);
      if (same_edge && x.kind == EventKind::Interaction && y.kind == EventKind::Swap) {
        out.events.push_back({EventKind::MergedSwapInteraction, x.a, x.b, x.term});
        ++i;
        continue;
      }
      if (same_edge && x.kind == EventKind::Swap && y.kind == EventKind::Interaction) {
        out.events.push_back({EventKind::MergedSwapInteraction, y.a, y.b, y.term});
        ++i;
        continue;
      }
    }
    out.events.push_back(ev[i]);
  }
  return out;
}

// --- iterated mapping ------------------------------------------------------

struct RouterConfig {
  bool use_astar = false;
  double q_exponent = 1.0;
  AstarCost cost_mode = AstarCost::swaps;
  long long beam_limit = 50000;

  RoutedCircuit route(const WeightedGraph& g, const HardwareGraph& h, const QubitMapping& m) const {
    return use_astar ? astar_route(g, h, m, q_exponent, cost_mode, beam_limit)
                     : greedy_route(g, h, m, q_exponent);
  }
};

/// Re-routes repeatedly, feeding each iteration's final mapping back in as
/// the next initial mapping, and returns the iteration whose merged circuit
/// needs the fewest CNOTs (initial mapping plus merged circuit).
inline std::pair<QubitMapping, RoutedCircuit> iterate_mapping(const WeightedGraph& g,
                                                              const HardwareGraph& h,
                                                              const QubitMapping& m0,
                                                              const RouterConfig& router,
                                                              int iterations) {
  if (iterations < 1) throw std::invalid_argument("iterate_mapping: iterations >= 1 required");
  QubitMapping m = m0;
  QubitMapping best_m = m0;
  RoutedCircuit best;
  long long best_cnots = -1;
  for (int it = 0; it < iterations; ++it) {
    RoutedCircuit c = router.route(g, h, m);
    RoutedCircuit merged = merge_swap_zz(c);
    long long cn = circuit_metrics(merged).cnots;
    if (best_cnots < 0 || cn < best_cnots) {
      best_cnots = cn;
      best = merged;
      best_m = m;
    }
    m = c.final;
  }
  return {best_m, best};
}

// --- SWAP-enhanced instances -------------------------------------------

/// Fixed per-layer execution plan for a SWAP-enhanced instance: plain edges,
/// then merged term+swap on the swap edges, then the new edges those swaps
/// expose; even layers run the stages in reverse so qubits return home.
/// For an odd total layer count the residual permutation must be applied to
/// measured bit-strings.
struct SwapEnhancedPlan {
  std::vector<int> stage_base;                     // edge indices: E' minus swap edges
  std::vector<std::pair<int, int>> stage_swap;     // (edge index, term id) on swap edges
  std::vector<int> stage_new;                      // edge indices in E_new
  std::vector<int> permutation;                    // vertex -> position after one odd layer
};

struct SwapEnhancedResult {
  WeightedGraph graph;
  SwapEnhancedPlan plan;
};

/// Builds the augmented instance: each swap edge (i, j) contributes new
/// edges from i to the other neighbors of j and from j to the other
/// neighbors of i. Requires that no vertex adjacent to a swap-edge endpoint
/// is itself incident to a swap edge.
inline SwapEnhancedResult build_swap_enhanced(const WeightedGraph& base,
                                              const std::vector<std::pair<int, int>>& swap_edges,
                                              double weight_lo = 1.0, double weight_hi = 1.0,
                                              std::uint64_t seed = 0) {
  std::set<std::pair<int, int>> base_set;
  for (const auto& e : base.edges()) base_set.insert({e.u, e.v});
  std::set<std::pair<int, int>> swap_set;
  std::set<int> swap_incident;
  for (auto [a, b] : swap_edges) {
    if (a > b) std::swap(a, b);
    if (!base_set.count({a, b}))
      throw std::invalid_argument("swap_enhanced: swap edge not present in the base graph");
    swap_set.insert({a, b});
    swap_incident.insert(a);
    swap_incident.insert(b);
  }
  auto adj = base.adjacency();
  for (auto [a, b] : swap_set) {
    for (auto endpoint : {a, b}) {
      int other = endpoint == a ? b : a;
      for (auto [nb, w] : adj[static_cast<std::size_t>(endpoint)]) {
        (void)w;
        if (nb == other) continue;
        if (swap_incident.count(nb))
          throw std::invalid_argument(
              "swap_enhanced: neighbor of a swap-edge endpoint is incident to a swap edge");
      }
    }
  }

  // E_new from the neighbor-expansion rule
  std::set<std::pair<int, int>> new_set;
  for (auto [i, j] : swap_set) {
    for (auto [jp, w] : adj[static_cast<std::size_t>(j)]) {
      (void)w;
      if (jp == i) continue;
      int a = std::min(i, jp), b = std::max(i, jp);
      if (base_set.count({a, b}) || !new_set.insert({a, b}).second)
        throw std::invalid_argument("swap_enhanced: expansion collides with an existing edge");
    }
    for (auto [ip, w] : adj[static_cast<std::size_t>(i)]) {
      (void)w;
      if (ip == j) continue;
      int a = std::min(ip, j), b = std::max(ip, j);
      if (base_set.count({a, b}) || !new_set.insert({a, b}).second)
        throw std::invalid_argument("swap_enhanced: expansion collides with an existing edge");
    }
  }

  std::vector<Edge> edges;
  for (const auto& e : base.edges()) edges.push_back(e);
  for (auto [a, b] : new_set) edges.push_back({a, b, 1.0});
  WeightedGraph augmented(base.n(), std::move(edges));
  if (weight_lo != weight_hi) {
    augmented = with_uniform_weights(augmented, weight_lo, weight_hi, seed);
  } else if (weight_lo != 1.0) {
    std::vector<Edge> rescaled = augmented.edges();
    for (auto& e : rescaled) e.w = weight_lo;
    augmented = WeightedGraph(augmented.n(), std::move(rescaled));
  }

  std::map<std::pair<int, int>, int> edge_index;
  for (std::size_t i = 0; i < augmented.edges().size(); ++i)
    edge_index[{augmented.edges()[i].u, augmented.edges()[i].v}] = static_cast<int>(i);

  SwapEnhancedPlan plan;
  for (auto [a, b] : base_set)
    if (!swap_set.count({a, b})) plan.stage_base.push_back(edge_index.at({a, b}));
  for (auto [a, b] : swap_set) {
    int idx = edge_index.at({a, b});
    plan.stage_swap.push_back({idx, idx});  // term id == edge index
  }
  for (auto [a, b] : new_set) plan.stage_new.push_back(edge_index.at({a, b}));

  plan.permutation.resize(static_cast<std::size_t>(base.n()));
  std::iota(plan.permutation.begin(), plan.permutation.end(), 0);
  for (auto [a, b] : swap_set)
    std::swap(plan.permutation[static_cast<std::size_t>(a)], plan.permutation[static_cast<std::size_t>(b)]);

  return {std::move(augmented), std::move(plan)};
}

// --- validation and serialization -----------------------------------------

/// Checks edge validity, exactly-once term coverage, interaction placement
/// consistency, and that replaying the swaps turns the initial mapping into
/// the final one. Throws on the first violation.
inline void validate_routed_circuit(const RoutedCircuit& c, const WeightedGraph& g,
                                    const HardwareGraph& h) {
  std::set<std::pair<int, int>> hw;
  for (auto [a, b] : h.edges()) hw.insert({a, b});
  std::vector<int> seen(g.edges().size(), 0);
  QubitMapping m = c.initial;
  for (const auto& e : c.events) {
    auto [a, b] = std::minmax(e.a, e.b);
    if (!hw.count({a, b})) throw std::runtime_error("routed circuit: event edge not in hardware graph");
    if (e.kind != EventKind::Swap) {
      if (e.term < 0 || e.term >= static_cast<int>(g.edges().size()))
        throw std::runtime_error("routed circuit: bad term id");
      const auto& t = g.edges()[static_cast<std::size_t>(e.term)];
      int pu = m.log_to_phys[static_cast<std::size_t>(t.u)];
      int pv = m.log_to_phys[static_cast<std::size_t>(t.v)];
      if (std::min(pu, pv) != a || std::max(pu, pv) != b)
        throw std::runtime_error("routed circuit: interaction does not act on its term's qubits");
      seen[static_cast<std::size_t>(e.term)]++;
    }
    if (e.kind != EventKind::Interaction) m.apply_swap(e.a, e.b);
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1) throw std::runtime_error("routed circuit: term not implemented exactly once");
  if (!(m == c.final)) throw std::runtime_error("routed circuit: swap replay does not reach final mapping");
}

inline nlohmann::json routed_circuit_to_json(const RoutedCircuit& c) {
  nlohmann::json j;
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : c.events) {
    nlohmann::json ev;
    ev["type"] = e.kind == EventKind::Swap ? "swap"
                 : e.kind == EventKind::Interaction ? "zz"
                                                    : "merged_swap_zz";
    ev["edge"] = {e.a, e.b};
    if (e.term >= 0) ev["term"] = e.term;
    events.push_back(ev);
  }
  j["events"] = events;
  j["initial_mapping"] = c.initial.log_to_phys;
  j["final_mapping"] = c.final.log_to_phys;
  j["beam_fallback"] = c.beam_fallback;
  auto m = circuit_metrics(c);
  j["metrics"] = {{"swaps", m.swaps}, {"cnots", m.cnots}, {"depth", m.depth}};
  return j;
}

}  // namespace qeopt
