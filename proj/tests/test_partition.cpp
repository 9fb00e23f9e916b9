// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "qeopt/partition.hpp"

using namespace qeopt;

namespace {

double cut_weight(const WeightedGraph& g, const Partition& p) {
  double w = 0.0;
  for (const auto& e : g.edges())
    if (p.block_of[static_cast<std::size_t>(e.u)] != p.block_of[static_cast<std::size_t>(e.v)])
      w += std::fabs(e.w);
  return w;
}

std::vector<SpinAssignment> random_locals(const WeightedGraph& g, const Partition& part,
                                          std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  auto members = part.members();
  std::vector<SpinAssignment> locals;
  for (int b = 0; b < part.blocks; ++b) {
    SpinAssignment z;
    for (std::size_t k = 0; k < members[static_cast<std::size_t>(b)].size(); ++k)
      z.z.push_back(coin(rng) ? 1 : -1);
    locals.push_back(std::move(z));
  }
  return locals;
}

SpinAssignment stitch(const WeightedGraph& g, const Partition& part,
                      const std::vector<SpinAssignment>& locals,
                      const std::vector<std::uint8_t>& flips) {
  auto members = part.members();
  SpinAssignment out;
  out.z.assign(static_cast<std::size_t>(g.n()), 1);
  for (int b = 0; b < part.blocks; ++b) {
    int sign = flips[static_cast<std::size_t>(b)] ? -1 : 1;
    for (std::size_t k = 0; k < members[static_cast<std::size_t>(b)].size(); ++k)
      out.z[static_cast<std::size_t>(members[static_cast<std::size_t>(b)][k])] =
          sign * locals[static_cast<std::size_t>(b)].z[k];
  }
  return out;
}

}  // namespace

TEST_CASE("partitioner basics", "[partition]") {
  SECTION("two disjoint cliques split cleanly") {
    std::vector<Edge> edges;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) {
        edges.push_back({i, j, 1.0});
        edges.push_back({i + 5, j + 5, 1.0});
      }
    WeightedGraph g(10, std::move(edges));
    Partition p = partition_graph(g, 5, 1);
    CHECK(p.cut_edges.empty());
    CHECK(cut_weight(g, p) == 0.0);
  }
  SECTION("a path splits at a single edge") {
    for (int k : {4, 5, 6}) {
      WeightedGraph g = make_line_graph(2 * k);
      Partition p = partition_graph(g, k, 3);
      CHECK(p.blocks == 2);
      CHECK(p.cut_edges.size() == 1);
      // oracle: exhaustive balanced bipartitions cannot do better than 1
      int best = g.edge_count();
      for (std::uint64_t mask = 0; mask < (1ULL << (2 * k)); ++mask) {
        int size = 0;
        for (int i = 0; i < 2 * k; ++i) size += (mask >> i) & 1;
        if (size != k) continue;
        int cut = 0;
        for (const auto& e : g.edges())
          if (((mask >> e.u) & 1) != ((mask >> e.v) & 1)) cut++;
        best = std::min(best, cut);
      }
      CHECK(static_cast<int>(p.cut_edges.size()) == best);
    }
  }
  SECTION("block sizes respect the cap") {
    WeightedGraph g = make_erdos_renyi(60, 0.1, 8);
    Partition p = partition_graph(g, 12, 5);
    std::vector<int> sizes(static_cast<std::size_t>(p.blocks), 0);
    for (int b : p.block_of) sizes[static_cast<std::size_t>(b)]++;
    for (int s : sizes) CHECK(s <= 12);
    // deterministic under seed
    Partition p2 = partition_graph(g, 12, 5);
    CHECK(p.block_of == p2.block_of);
  }
}

TEST_CASE("flip qubo encodes the stitched objective exactly", "[partition]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    WeightedGraph g = with_uniform_weights(make_erdos_renyi(18, 0.25, 70 + seed), -1.0, 1.0, seed);
    Partition part = partition_graph(g, 7, seed);
    auto locals = random_locals(g, part, seed + 100);
    FlipQubo fq = build_flip_qubo(g, part, locals);
    for (std::uint64_t mask = 0; mask < (1ULL << part.blocks); ++mask) {
      auto flips = index_to_bits(mask, part.blocks);
      SpinAssignment full = stitch(g, part, locals, flips);
      CHECK(fq.stitched_objective(flips) ==
            Catch::Approx(maxcut_energy(g, full)).margin(1e-9));
    }
  }
}

TEST_CASE("flip qubo folds linear node terms into per-block fields", "[partition]") {
  // node-weighted graph: spin objective gains sum_i h_i z_i
  WeightedGraph g(6, {{0, 1, 1.0}, {1, 2, -0.5}, {2, 3, 0.7}, {3, 4, 1.0}, {4, 5, -1.0}},
                  {0.3, -0.2, 0.5, 0.0, -0.4, 0.1});
  Partition part = partition_graph(g, 3, 2);
  auto locals = random_locals(g, part, 9);
  FlipQubo fq = build_flip_qubo(g, part, locals);
  auto spin_objective = [&](const SpinAssignment& z) {
    double e = maxcut_energy(g, z);
    for (int i = 0; i < g.n(); ++i)
      e += g.node_weights()[static_cast<std::size_t>(i)] * z.z[static_cast<std::size_t>(i)];
    return e;
  };
  for (std::uint64_t mask = 0; mask < (1ULL << part.blocks); ++mask) {
    auto flips = index_to_bits(mask, part.blocks);
    CHECK(fq.stitched_objective(flips) ==
          Catch::Approx(spin_objective(stitch(g, part, locals, flips))).margin(1e-9));
  }
}

TEST_CASE("flip qubo corner cases", "[partition]") {
  SECTION("no cut edges: all couplings vanish") {
    std::vector<Edge> edges;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        edges.push_back({i, j, 1.0});
        edges.push_back({i + 4, j + 4, 1.0});
      }
    WeightedGraph g(8, std::move(edges));
    Partition part = partition_graph(g, 4, 1);
    auto locals = random_locals(g, part, 3);
    FlipQubo fq = build_flip_qubo(g, part, locals);
    for (std::uint64_t mask = 0; mask < 4; ++mask)
      CHECK(fq.qubo.objective(index_to_bits(mask, 2)) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("two blocks joined by one edge match the 4-pattern enumeration") {
    WeightedGraph g = make_line_graph(6);
    Partition part = partition_graph(g, 3, 1);
    REQUIRE(part.blocks == 2);
    auto locals = random_locals(g, part, 5);
    FlipQubo fq = build_flip_qubo(g, part, locals);
    double best_direct = 1e100;
    for (std::uint64_t mask = 0; mask < 4; ++mask)
      best_direct = std::min(best_direct,
                             maxcut_energy(g, stitch(g, part, locals, index_to_bits(mask, 2))));
    double best_fq = 1e100;
    for (std::uint64_t mask = 0; mask < 4; ++mask)
      best_fq = std::min(best_fq, fq.stitched_objective(index_to_bits(mask, 2)));
    CHECK(best_fq == Catch::Approx(best_direct).margin(1e-12));
  }
  SECTION("missing local solutions are rejected") {
    WeightedGraph g = make_line_graph(6);
    Partition part = partition_graph(g, 3, 1);
    CHECK_THROWS_AS(build_flip_qubo(g, part, {}), std::invalid_argument);
  }
}

TEST_CASE("recombination", "[partition]") {
  SECTION("one block is the identity") {
    WeightedGraph g = make_line_graph(5);
    Partition part = partition_graph(g, 10, 1);
    REQUIRE(part.blocks == 1);
    auto locals = random_locals(g, part, 2);
    SpinAssignment out = recombine(g, part, locals);
    // identical up to the global flip degeneracy (flip qubo may pick either)
    bool same = true, flipped = true;
    for (int i = 0; i < g.n(); ++i) {
      same &= out.z[static_cast<std::size_t>(i)] == locals[0].z[static_cast<std::size_t>(i)];
      flipped &= out.z[static_cast<std::size_t>(i)] == -locals[0].z[static_cast<std::size_t>(i)];
    }
    CHECK((same || flipped));
  }
  SECTION("flips are globally optimal over all patterns for small block counts") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      WeightedGraph g = with_uniform_weights(make_erdos_renyi(24, 0.2, 40 + seed), -1.0, 1.0, seed);
      Partition part = partition_graph(g, 8, seed);
      auto locals = random_locals(g, part, seed + 7);
      SpinAssignment out = recombine(g, part, locals);
      double got = maxcut_energy(g, out);
      double best = 1e100;
      for (std::uint64_t mask = 0; mask < (1ULL << part.blocks); ++mask)
        best = std::min(best, maxcut_energy(g, stitch(g, part, locals, index_to_bits(mask, part.blocks))));
      CHECK(got == Catch::Approx(best).margin(1e-9));
      // never worse than the naive concatenation (flip pattern 0)
      CHECK(got <= maxcut_energy(g, stitch(g, part, locals,
                                            std::vector<std::uint8_t>(static_cast<std::size_t>(part.blocks), 0))) +
                       1e-9);
    }
  }
  SECTION("flipping one block's local solution leaves the recombined value unchanged") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      WeightedGraph g = with_uniform_weights(make_erdos_renyi(20, 0.3, 90 + seed), -1.0, 1.0, seed);
      Partition part = partition_graph(g, 7, seed);
      auto locals = random_locals(g, part, seed + 11);
      double before = maxcut_energy(g, recombine(g, part, locals));
      auto flipped = locals;
      for (auto& s : flipped[0].z) s = -s;
      double after = maxcut_energy(g, recombine(g, part, flipped));
      CHECK(before == Catch::Approx(after).margin(1e-9));
    }
  }
}
