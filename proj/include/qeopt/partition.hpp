// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Partition-and-recombine for instances beyond the emulation cap: a built-in
// multilevel partitioner (heavy-edge matching coarsening + Kernighan-Lin
// style refinement) splits the graph into capped blocks, each block is
// solved independently, and the per-block Z2 flips are chosen by solving a
// small effective QUBO over one flip bit per block.

#pragma once

#include <nlohmann/json.hpp>

#include "qeopt/heuristics.hpp"
#include "qeopt/qubo.hpp"

namespace qeopt {

struct Partition {
  std::vector<int> block_of;       // vertex -> block id
  int blocks = 0;
  std::vector<Edge> cut_edges;     // edges crossing blocks, with weights

  std::vector<std::vector<int>> members() const {
    std::vector<std::vector<int>> m(static_cast<std::size_t>(blocks));
    for (std::size_t v = 0; v < block_of.size(); ++v)
      m[static_cast<std::size_t>(block_of[v])].push_back(static_cast<int>(v));
    return m;
  }
};

inline nlohmann::json partition_to_json(const Partition& p) {
  nlohmann::json j;
  j["assignment"] = p.block_of;
  j["blocks"] = p.blocks;
  nlohmann::json cuts = nlohmann::json::array();
  for (const auto& e : p.cut_edges) cuts.push_back({e.u, e.v, e.w});
  j["cut_edges"] = cuts;
  return j;
}

namespace partition_detail {

struct CoarseGraph {
  int n = 0;
  std::vector<long long> size;                       // original vertices per coarse node
  std::map<std::pair<int, int>, double> edge_weight;  // |w| summed for matching affinity
  std::vector<std::vector<int>> fine_members;         // coarse node -> original vertices
};

inline CoarseGraph initial_coarse(const WeightedGraph& g) {
  CoarseGraph cg;
  cg.n = g.n();
  cg.size.assign(static_cast<std::size_t>(g.n()), 1);
  cg.fine_members.resize(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) cg.fine_members[static_cast<std::size_t>(v)] = {v};
  for (const auto& e : g.edges()) cg.edge_weight[{e.u, e.v}] += std::fabs(e.w);
  return cg;
}

/// One round of heavy-edge matching contraction respecting the size cap.
inline CoarseGraph contract_once(const CoarseGraph& cg, long long max_block, std::uint64_t seed,
                                 bool* progressed) {
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(cg.n));
  for (const auto& [key, w] : cg.edge_weight) {
    adj[static_cast<std::size_t>(key.first)].push_back({key.second, w});
    adj[static_cast<std::size_t>(key.second)].push_back({key.first, w});
  }
  std::vector<int> order(static_cast<std::size_t>(cg.n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<int> match(static_cast<std::size_t>(cg.n), -1);
  for (int v : order) {
    if (match[static_cast<std::size_t>(v)] >= 0) continue;
    int best = -1;
    double best_w = -1.0;
    for (auto [u, w] : adj[static_cast<std::size_t>(v)]) {
      if (match[static_cast<std::size_t>(u)] >= 0) continue;
      if (cg.size[static_cast<std::size_t>(v)] + cg.size[static_cast<std::size_t>(u)] > max_block) continue;
      if (w > best_w || (w == best_w && u < best)) {
        best_w = w;
        best = u;
      }
    }
    if (best >= 0) {
      match[static_cast<std::size_t>(v)] = best;
      match[static_cast<std::size_t>(best)] = v;
    }
  }

  std::vector<int> coarse_id(static_cast<std::size_t>(cg.n), -1);
  CoarseGraph out;
  for (int v = 0; v < cg.n; ++v) {
    if (coarse_id[static_cast<std::size_t>(v)] >= 0) continue;
    int partner = match[static_cast<std::size_t>(v)];
    int id = out.n++;
    coarse_id[static_cast<std::size_t>(v)] = id;
    std::vector<int> members = cg.fine_members[static_cast<std::size_t>(v)];
    long long size = cg.size[static_cast<std::size_t>(v)];
    if (partner >= 0 && partner != v) {
      coarse_id[static_cast<std::size_t>(partner)] = id;
      size += cg.size[static_cast<std::size_t>(partner)];
      const auto& pm = cg.fine_members[static_cast<std::size_t>(partner)];
      members.insert(members.end(), pm.begin(), pm.end());
    }
    out.size.push_back(size);
    out.fine_members.push_back(std::move(members));
  }
  *progressed = out.n < cg.n;
  for (const auto& [key, w] : cg.edge_weight) {
    int a = coarse_id[static_cast<std::size_t>(key.first)];
    int b = coarse_id[static_cast<std::size_t>(key.second)];
    if (a == b) continue;
    out.edge_weight[{std::min(a, b), std::max(a, b)}] += w;
  }
  return out;
}

}  // namespace partition_detail

/// Multilevel partition into blocks of at most max_block vertices,
/// minimizing total |weight| of cut edges. Deterministic under seed.
inline Partition partition_graph(const WeightedGraph& g, int max_block, std::uint64_t seed) {
  if (max_block < 2) throw std::invalid_argument("partition: max_block >= 2 required");
  int blocks = static_cast<int>((g.n() + max_block - 1) / max_block);
  blocks = std::max(blocks, 1);

  // coarsen until the coarse graph is small, respecting the size cap
  partition_detail::CoarseGraph cg = partition_detail::initial_coarse(g);
  std::uint64_t round = 0;
  while (cg.n > std::max(4 * blocks, 16)) {
    bool progressed = false;
    cg = partition_detail::contract_once(cg, max_block, derive_seed(seed, round++), &progressed);
    if (!progressed) break;
  }

  // initial assignment: BFS region growth over coarse nodes, largest first,
  // into the least-loaded block with room
  std::vector<long long> load(static_cast<std::size_t>(blocks), 0);
  std::vector<int> coarse_block(static_cast<std::size_t>(cg.n), -1);
  {
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(cg.n));
    for (const auto& [key, w] : cg.edge_weight) {
      adj[static_cast<std::size_t>(key.first)].push_back({key.second, w});
      adj[static_cast<std::size_t>(key.second)].push_back({key.first, w});
    }
    std::vector<int> order(static_cast<std::size_t>(cg.n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return cg.size[static_cast<std::size_t>(a)] > cg.size[static_cast<std::size_t>(b)];
    });
    for (int v : order) {
      if (coarse_block[static_cast<std::size_t>(v)] >= 0) continue;
      // prefer the block holding the heaviest already-assigned neighbor
      std::vector<double> affinity(static_cast<std::size_t>(blocks), 0.0);
      for (auto [u, w] : adj[static_cast<std::size_t>(v)])
        if (coarse_block[static_cast<std::size_t>(u)] >= 0)
          affinity[static_cast<std::size_t>(coarse_block[static_cast<std::size_t>(u)])] += w;
      int pick = -1;
      for (int b = 0; b < blocks; ++b) {
        if (load[static_cast<std::size_t>(b)] + cg.size[static_cast<std::size_t>(v)] > max_block) continue;
        if (pick < 0 || affinity[static_cast<std::size_t>(b)] > affinity[static_cast<std::size_t>(pick)] ||
            (affinity[static_cast<std::size_t>(b)] == affinity[static_cast<std::size_t>(pick)] &&
             load[static_cast<std::size_t>(b)] < load[static_cast<std::size_t>(pick)]))
          pick = b;
      }
      if (pick < 0) {  // cap pressure: take the least-loaded block
        pick = 0;
        for (int b = 1; b < blocks; ++b)
          if (load[static_cast<std::size_t>(b)] < load[static_cast<std::size_t>(pick)]) pick = b;
      }
      coarse_block[static_cast<std::size_t>(v)] = pick;
      load[static_cast<std::size_t>(pick)] += cg.size[static_cast<std::size_t>(v)];
    }
  }

  // project to the original vertices
  Partition part;
  part.blocks = blocks;
  part.block_of.assign(static_cast<std::size_t>(g.n()), 0);
  for (int cv = 0; cv < cg.n; ++cv)
    for (int v : cg.fine_members[static_cast<std::size_t>(cv)])
      part.block_of[static_cast<std::size_t>(v)] = coarse_block[static_cast<std::size_t>(cv)];

  // Kernighan-Lin style refinement on the original graph: move a vertex to
  // another block when that strictly reduces the cut weight and respects
  // the size cap; repeat until a full pass makes no move.
  auto adj = g.adjacency();
  std::vector<long long> block_size(static_cast<std::size_t>(blocks), 0);
  for (int v = 0; v < g.n(); ++v) block_size[static_cast<std::size_t>(part.block_of[static_cast<std::size_t>(v)])]++;
  bool moved = true;
  int passes = 0;
  while (moved && passes++ < 50) {
    moved = false;
    for (int v = 0; v < g.n(); ++v) {
      int cur = part.block_of[static_cast<std::size_t>(v)];
      std::vector<double> link(static_cast<std::size_t>(blocks), 0.0);
      for (auto [u, w] : adj[static_cast<std::size_t>(v)])
        link[static_cast<std::size_t>(part.block_of[static_cast<std::size_t>(u)])] += std::fabs(w);
      int best = cur;
      double best_gain = 1e-12;
      for (int b = 0; b < blocks; ++b) {
        if (b == cur) continue;
        if (block_size[static_cast<std::size_t>(b)] + 1 > max_block) continue;
        double gain = link[static_cast<std::size_t>(b)] - link[static_cast<std::size_t>(cur)];
        if (gain > best_gain) {
          best_gain = gain;
          best = b;
        }
      }
      if (best != cur) {
        part.block_of[static_cast<std::size_t>(v)] = best;
        block_size[static_cast<std::size_t>(cur)]--;
        block_size[static_cast<std::size_t>(best)]++;
        moved = true;
      }
    }
  }

  for (const auto& e : g.edges())
    if (part.block_of[static_cast<std::size_t>(e.u)] != part.block_of[static_cast<std::size_t>(e.v)])
      part.cut_edges.push_back(e);
  return part;
}

/// Extracts a block as a standalone instance with a local vertex numbering.
struct BlockInstance {
  WeightedGraph graph;
  std::vector<int> global_of_local;
};

inline BlockInstance block_subgraph(const WeightedGraph& g, const Partition& part, int block) {
  BlockInstance bi;
  std::vector<int> local(static_cast<std::size_t>(g.n()), -1);
  for (int v = 0; v < g.n(); ++v)
    if (part.block_of[static_cast<std::size_t>(v)] == block) {
      local[static_cast<std::size_t>(v)] = static_cast<int>(bi.global_of_local.size());
      bi.global_of_local.push_back(v);
    }
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (local[static_cast<std::size_t>(e.u)] >= 0 && local[static_cast<std::size_t>(e.v)] >= 0)
      edges.push_back({local[static_cast<std::size_t>(e.u)], local[static_cast<std::size_t>(e.v)], e.w});
  bi.graph = WeightedGraph(static_cast<int>(bi.global_of_local.size()), std::move(edges));
  return bi;
}

/// Effective QUBO over one flip bit per block. With s_b = 1 - 2 f_b, the
/// full Max-Cut spin objective of the stitched assignment equals
///   intra_constant + sum_{a<b} J_ab s_a s_b + sum_a L_a s_a,
/// where J_ab sums w_ij z_i z_j over cut edges between the blocks at the
/// local solutions, and L_a folds any linear spin terms (zero for Max-Cut).
struct FlipQubo {
  QuboInstance qubo;        // over flip bits, sense = minimize
  double intra_constant = 0.0;
  double coupling_constant = 0.0;  // sum_{a<b} J_ab + sum_a L_a offset folded out of the QUBO

  /// Full-graph minimization objective at a flip pattern.
  double stitched_objective(const std::vector<std::uint8_t>& flips) const {
    return intra_constant + coupling_constant + qubo.objective(flips);
  }
};

inline FlipQubo build_flip_qubo(const WeightedGraph& g, const Partition& part,
                                const std::vector<SpinAssignment>& local_solutions) {
  if (static_cast<int>(local_solutions.size()) != part.blocks)
    throw std::invalid_argument("flip qubo: one local solution per block required");
  auto members = part.members();
  for (int b = 0; b < part.blocks; ++b)
    if (local_solutions[static_cast<std::size_t>(b)].z.size() != members[static_cast<std::size_t>(b)].size())
      throw std::invalid_argument("flip qubo: local solution has wrong length");

  // global spin values at the unflipped local solutions
  std::vector<int> spin(static_cast<std::size_t>(g.n()), 0);
  for (int b = 0; b < part.blocks; ++b)
    for (std::size_t k = 0; k < members[static_cast<std::size_t>(b)].size(); ++k)
      spin[static_cast<std::size_t>(members[static_cast<std::size_t>(b)][k])] =
          local_solutions[static_cast<std::size_t>(b)].z[k];

  FlipQubo fq;
  std::map<std::pair<int, int>, double> coupling;
  for (const auto& e : g.edges()) {
    int ba = part.block_of[static_cast<std::size_t>(e.u)];
    int bb = part.block_of[static_cast<std::size_t>(e.v)];
    double zz = e.w * spin[static_cast<std::size_t>(e.u)] * spin[static_cast<std::size_t>(e.v)];
    if (ba == bb)
      fq.intra_constant += zz;
    else
      coupling[{std::min(ba, bb), std::max(ba, bb)}] += zz;
  }

  // Linear spin terms (node weights h_i, present for MIS-style objectives)
  // fold into a per-block field: sum_{i in a} h_i z_i^loc multiplies s_a.
  std::vector<double> field(static_cast<std::size_t>(part.blocks), 0.0);
  if (g.has_node_weights())
    for (int v = 0; v < g.n(); ++v)
      field[static_cast<std::size_t>(part.block_of[static_cast<std::size_t>(v)])] +=
          g.node_weights()[static_cast<std::size_t>(v)] * spin[static_cast<std::size_t>(v)];

  // spin couplings J_ab s_a s_b and fields L_a s_a over s = 1 - 2f expand to
  //   J_ab (1 - 2 f_a - 2 f_b + 4 f_a f_b) + L_a (1 - 2 f_a)
  fq.qubo = QuboInstance::zeros(part.blocks, Sense::minimize);
  for (const auto& [key, j_ab] : coupling) {
    fq.coupling_constant += j_ab;
    fq.qubo.add_c(key.first, -2.0 * j_ab);
    fq.qubo.add_c(key.second, -2.0 * j_ab);
    fq.qubo.add_q(key.first, key.second, 2.0 * j_ab);  // x^T Q x counts this twice
  }
  for (int b = 0; b < part.blocks; ++b) {
    fq.coupling_constant += field[static_cast<std::size_t>(b)];
    fq.qubo.add_c(b, -2.0 * field[static_cast<std::size_t>(b)]);
  }
  return fq;
}

/// Chooses block flips (brute force up to 20 blocks, tabu search beyond)
/// and returns the stitched full assignment.
inline SpinAssignment recombine(const WeightedGraph& g, const Partition& part,
                                const std::vector<SpinAssignment>& local_solutions,
                                const HeuristicConfig& cfg = {}) {
  FlipQubo fq = build_flip_qubo(g, part, local_solutions);
  int blocks = part.blocks;
  std::vector<std::uint8_t> best_flips(static_cast<std::size_t>(blocks), 0);
  if (blocks <= 20) {
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (1ULL << blocks); ++mask) {
      auto flips = index_to_bits(mask, blocks);
      double v = fq.qubo.objective(flips);
      if (v < best - 1e-15) {
        best = v;
        best_flips = flips;
      }
    }
  } else {
    HeuristicConfig flip_cfg = cfg;
    flip_cfg.max_iters = std::max<long long>(cfg.max_iters, 50LL * blocks);
    auto [x, cost, rec] = tabu_search(fq.qubo, std::vector<std::uint8_t>(static_cast<std::size_t>(blocks), 0), flip_cfg);
    (void)cost;
    (void)rec;
    best_flips = x;
  }

  auto members = part.members();
  SpinAssignment out;
  out.z.assign(static_cast<std::size_t>(g.n()), 1);
  for (int b = 0; b < blocks; ++b) {
    int sign = best_flips[static_cast<std::size_t>(b)] ? -1 : 1;
    for (std::size_t k = 0; k < members[static_cast<std::size_t>(b)].size(); ++k)
      out.z[static_cast<std::size_t>(members[static_cast<std::size_t>(b)][k])] =
          sign * local_solutions[static_cast<std::size_t>(b)].z[k];
  }
  return out;
}

}  // namespace qeopt
