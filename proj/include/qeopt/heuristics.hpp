// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Warm-startable multistart tabu search over QUBO instances, plus a plain
// 1-flip descent baseline. One iteration is one accepted flip; flips are
// scored by incrementally maintained gains. A flipped variable stays tabu
// for a tenure drawn per flip, with aspiration whenever a move would beat
// the best cost seen. Costs are always minimized internally.

#pragma once

#include <chrono>
#include <optional>

#include "qeopt/qubo.hpp"
#include "qeopt/sample_set.hpp"

namespace qeopt {

struct HeuristicConfig {
  long long max_iters = 500;   // iteration cut-off per restart
  int tenure_min = 0;          // 0: default ceil(n/10)
  int tenure_max = 0;          // 0: default tenure_min + 10
  long long improvement_cutoff = 0;  // stop a restart after this many non-improving iters (0: off)
  double time_limit_seconds = 0.0;   // used by timed_multistart
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("heuristic config: max_iters >= 1 required");
    if (tenure_min < 0 || tenure_max < 0 || (tenure_max != 0 && tenure_max < tenure_min))
      throw std::invalid_argument("heuristic config: bad tenure range");
  }
};

/// Ordered pool of start strings. Cycle policy walks the pool in order;
/// sample policy draws uniformly with replacement (seeded).
struct WarmStartPool {
  enum class Policy { cycle, sample_with_replacement };
  enum class Source { random, qaoa, filtered_qaoa };

  std::vector<std::string> strings;
  Policy policy = Policy::cycle;
  Source source = Source::random;

  static WarmStartPool uniform_random(int n, int count, std::uint64_t seed) {
    WarmStartPool pool;
    pool.source = Source::random;
    Rng rng = make_rng(seed);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < count; ++i) {
      std::string s(static_cast<std::size_t>(n), '0');
      for (auto& ch : s) ch = coin(rng) ? '1' : '0';
      pool.strings.push_back(std::move(s));
    }
    return pool;
  }

  /// Expands a sample histogram into occurrences and shuffles them once so
  /// cycling draws an unbiased mix. Deterministic under seed.
  static WarmStartPool from_samples(const SampleSet& s, std::uint64_t seed,
                                    Source source = Source::qaoa) {
    WarmStartPool pool;
    pool.source = source;
    for (const auto& [key, c] : s.counts)
      for (long long i = 0; i < c; ++i) pool.strings.push_back(key);
    Rng rng = make_rng(seed);
    std::shuffle(pool.strings.begin(), pool.strings.end(), rng);
    return pool;
  }

  const std::string& draw(long long index, Rng& rng) const {
    if (strings.empty()) throw std::invalid_argument("warm start pool is empty");
    if (policy == Policy::cycle)
      return strings[static_cast<std::size_t>(index % static_cast<long long>(strings.size()))];
    std::uniform_int_distribution<std::size_t> pick(0, strings.size() - 1);
    return strings[pick(rng)];
  }
};

/// Per-restart search record. Costs are minimization-orientation values;
/// `improvements` holds (iteration, best cost) at every new best, starting
/// with iteration 0 for the start string itself.
struct RestartRecord {
  std::uint64_t start_hash = 0;
  long long iterations_run = 0;
  double best_cost = 0.0;
  long long iteration_of_best = 0;
  double wall_seconds = 0.0;
  double seconds_of_best = 0.0;
  std::vector<std::pair<long long, double>> improvements;
  std::vector<std::pair<double, double>> timed_improvements;  // (seconds, best cost)
};

struct RunTrace {
  std::vector<RestartRecord> restarts;
  std::optional<double> known_optimum;  // minimization orientation

  long long max_iterations() const {
    long long m = 0;
    for (const auto& r : restarts) m = std::max(m, r.iterations_run);
    return m;
  }
};

namespace tabu_detail {

/// Precomputed minimization view shared across restarts.
struct Workspace {
  QuboInstance::MinView view;
  int n = 0;

  explicit Workspace(const QuboInstance& q) : view(q.min_view()), n(q.n()) {}

  double cost_of(const std::vector<std::uint8_t>& x) const {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!x[static_cast<std::size_t>(i)]) continue;
      e += view.linear[static_cast<std::size_t>(i)];
      for (auto [j, w] : view.couplings[static_cast<std::size_t>(i)])
        if (j > i && x[static_cast<std::size_t>(j)]) e += w;
    }
    return e;
  }
};

struct SearchState {
  std::vector<std::uint8_t> x;
  std::vector<double> gain;  // gain[i] = linear_i + sum_j coupling_ij x_j
  double cost = 0.0;

  void init(const Workspace& ws, const std::vector<std::uint8_t>& start) {
    x = start;
    cost = ws.cost_of(x);
    gain.assign(static_cast<std::size_t>(ws.n), 0.0);
    for (int i = 0; i < ws.n; ++i) {
      gain[static_cast<std::size_t>(i)] = ws.view.linear[static_cast<std::size_t>(i)];
      for (auto [j, w] : ws.view.couplings[static_cast<std::size_t>(i)])
        if (x[static_cast<std::size_t>(j)]) gain[static_cast<std::size_t>(i)] += w;
    }
  }

  double flip_delta(int i) const {
    return (x[static_cast<std::size_t>(i)] ? -1.0 : 1.0) * gain[static_cast<std::size_t>(i)];
  }

  void apply_flip(const Workspace& ws, int i) {
    cost += flip_delta(i);
    double sign = x[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
    x[static_cast<std::size_t>(i)] ^= 1;
    for (auto [j, w] : ws.view.couplings[static_cast<std::size_t>(i)])
      gain[static_cast<std::size_t>(j)] += sign * w;
  }
};

struct TabuResult {
  std::vector<std::uint8_t> best_x;
  double best_cost = 0.0;
  RestartRecord record;
};

inline TabuResult tabu_run(const Workspace& ws, const std::vector<std::uint8_t>& start,
                           const HeuristicConfig& cfg, std::uint64_t seed,
                           const std::chrono::steady_clock::time_point* clock_start = nullptr,
                           double time_budget = 0.0) {
  const int n = ws.n;
  int tenure_lo = cfg.tenure_min > 0 ? cfg.tenure_min : (n + 9) / 10;
  int tenure_hi = cfg.tenure_max > 0 ? cfg.tenure_max : tenure_lo + 10;
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> tenure(tenure_lo, tenure_hi);

  SearchState st;
  st.init(ws, start);
  TabuResult res;
  res.best_x = st.x;
  res.best_cost = st.cost;
  res.record.start_hash = fnv1a_hash(bits_to_string(start));
  res.record.improvements.push_back({0, st.cost});
  auto t0 = std::chrono::steady_clock::now();
  auto seconds_since = [&](std::chrono::steady_clock::time_point ref) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - ref).count();
  };
  // improvement timestamps run on the shared clock when one is given
  // (resource-pool mode), otherwise on this restart's own clock
  auto stamp = [&]() { return seconds_since(clock_start ? *clock_start : t0); };
  res.record.timed_improvements.push_back({stamp(), st.cost});

  std::vector<long long> tabu_until(static_cast<std::size_t>(n), -1);
  long long since_improvement = 0;
  long long iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    if (clock_start && time_budget > 0.0 && seconds_since(*clock_start) >= time_budget) break;
    int best_flip = -1;
    double best_delta = 0.0;
    for (int i = 0; i < n; ++i) {
      double delta = st.flip_delta(i);
      bool is_tabu = tabu_until[static_cast<std::size_t>(i)] > iter;
      if (is_tabu && !(st.cost + delta < res.best_cost - 1e-12)) continue;  // aspiration
      if (best_flip < 0 || delta < best_delta) {
        best_flip = i;
        best_delta = delta;
      }
    }
    if (best_flip < 0) break;  // everything tabu and nothing aspires
    st.apply_flip(ws, best_flip);
    tabu_until[static_cast<std::size_t>(best_flip)] = iter + 1 + tenure(rng);
    if (st.cost < res.best_cost - 1e-12) {
      res.best_cost = st.cost;
      res.best_x = st.x;
      res.record.iteration_of_best = iter + 1;
      res.record.improvements.push_back({iter + 1, st.cost});
      res.record.timed_improvements.push_back({stamp(), st.cost});
      res.record.seconds_of_best = seconds_since(t0);
      since_improvement = 0;
    } else if (cfg.improvement_cutoff > 0 && ++since_improvement >= cfg.improvement_cutoff) {
      ++iter;
      break;
    }
  }
  res.record.iterations_run = iter;
  res.record.best_cost = res.best_cost;
  res.record.wall_seconds = seconds_since(t0);
  return res;
}

}  // namespace tabu_detail

/// Single tabu-search run from a given start string. Returns the best
/// visited solution, its cost in the instance's reported orientation, and
/// the restart record (minimization orientation).
inline std::tuple<std::vector<std::uint8_t>, double, RestartRecord> tabu_search(
    const QuboInstance& q, const std::vector<std::uint8_t>& start, const HeuristicConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(start.size()) != q.n())
    throw std::invalid_argument("tabu_search: start string length != n");
  tabu_detail::Workspace ws(q);
  auto res = tabu_detail::tabu_run(ws, start, cfg, cfg.seed);
  return {res.best_x, q.report(res.best_cost), res.record};
}

/// R independent tabu restarts, each seeded from the next pool draw.
inline RunTrace multistart(const QuboInstance& q, const WarmStartPool& pool, long long restarts,
                           const HeuristicConfig& cfg) {
  cfg.validate();
  if (restarts < 1) throw std::invalid_argument("multistart: restarts >= 1 required");
  if (pool.strings.empty()) throw std::invalid_argument("multistart: empty pool");
  tabu_detail::Workspace ws(q);
  Rng pool_rng = make_rng(cfg.seed, 0xB00C);
  RunTrace trace;
  for (long long r = 0; r < restarts; ++r) {
    const std::string& start = pool.draw(r, pool_rng);
    auto res = tabu_detail::tabu_run(ws, string_to_bits(start), cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    trace.restarts.push_back(std::move(res.record));
  }
  return trace;
}

/// Resource-pool variant: each repetition restarts from successive pool
/// draws until the wall clock (started after the pool already exists)
/// exceeds the limit, recording time-stamped global best improvements.
/// The trace holds one record per repetition.
inline RunTrace timed_multistart(const QuboInstance& q, const WarmStartPool& pool,
                                 double time_limit_seconds, long long repetitions,
                                 const HeuristicConfig& cfg) {
  cfg.validate();
  if (!(time_limit_seconds > 0.0)) throw std::invalid_argument("timed_multistart: positive time limit required");
  if (repetitions < 1) throw std::invalid_argument("timed_multistart: repetitions >= 1 required");
  if (pool.strings.empty()) throw std::invalid_argument("timed_multistart: empty pool");
  tabu_detail::Workspace ws(q);
  Rng pool_rng = make_rng(cfg.seed, 0xB00C);
  RunTrace trace;
  long long draw_index = 0;
  for (long long rep = 0; rep < repetitions; ++rep) {
    auto clock_start = std::chrono::steady_clock::now();
    RestartRecord combined;
    combined.best_cost = std::numeric_limits<double>::infinity();
    long long inner = 0;
    for (;;) {
      double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
      if (inner > 0 && elapsed >= time_limit_seconds) break;
      const std::string& start = pool.draw(draw_index, pool_rng);
      ++draw_index;
      auto res = tabu_detail::tabu_run(ws, string_to_bits(start), cfg,
                                       derive_seed(cfg.seed, 0xF00D + static_cast<std::uint64_t>(draw_index)),
                                       &clock_start, time_limit_seconds);
      if (inner == 0) combined.start_hash = res.record.start_hash;
      combined.iterations_run += res.record.iterations_run;
      for (auto [t, c] : res.record.timed_improvements) {
        if (c < combined.best_cost - 1e-12) {
          combined.best_cost = c;
          combined.seconds_of_best = t;
          combined.timed_improvements.push_back({t, c});
          combined.iteration_of_best = combined.iterations_run;
        }
      }
      ++inner;
    }
    combined.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    trace.restarts.push_back(std::move(combined));
  }
  return trace;
}

/// Strict best-improvement 1-flip descent; stops at a local optimum.
inline std::tuple<std::vector<std::uint8_t>, double, RestartRecord> local_search_baseline(
    const QuboInstance& q, const std::vector<std::uint8_t>& start, const HeuristicConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(start.size()) != q.n())
    throw std::invalid_argument("local_search: start string length != n");
  tabu_detail::Workspace ws(q);
  tabu_detail::SearchState st;
  st.init(ws, start);
  RestartRecord rec;
  rec.start_hash = fnv1a_hash(bits_to_string(start));
  rec.improvements.push_back({0, st.cost});
  auto t0 = std::chrono::steady_clock::now();
  long long iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    int best_flip = -1;
    double best_delta = -1e-12;
    for (int i = 0; i < ws.n; ++i) {
      double delta = st.flip_delta(i);
      if (delta < best_delta) {
        best_delta = delta;
        best_flip = i;
      }
    }
    if (best_flip < 0) break;
    st.apply_flip(ws, best_flip);
    rec.improvements.push_back({iter + 1, st.cost});
    rec.iteration_of_best = iter + 1;
  }
  rec.iterations_run = iter;
  rec.best_cost = st.cost;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {st.x, q.report(st.cost), rec};
}

}  // namespace qeopt
