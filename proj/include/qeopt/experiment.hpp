// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end experiment orchestration: generate or load instances, certify
// the optimum, predict QAOA angles, emulate and sample, filter, then race
// warm-started against cold-started tabu search and report Q-factors.
// Instances beyond the emulation cap are partitioned, each block is sampled
// separately, and per-block Z2 flips are re-optimized when stitching warm
// starts; their "optimum" is the best cost seen across all runs and the
// report flags it as such.

#pragma once

#include <atomic>
#include <functional>
#include <thread>

#include "qeopt/benchmark.hpp"
#include "qeopt/filters.hpp"
#include "qeopt/params.hpp"
#include "qeopt/partition.hpp"
#include "qeopt/routing.hpp"

namespace qeopt {

struct WeightSpec {
  enum class Kind { unit, uniform, signs };
  Kind kind = Kind::unit;
  double lo = -1.0;
  double hi = 1.0;
  std::uint64_t seed = 0;

  WeightedGraph apply(const WeightedGraph& g) const {
    switch (kind) {
      case Kind::unit:
        return g;
      case Kind::uniform:
        return with_uniform_weights(g, lo, hi, seed);
      case Kind::signs:
        return with_sign_weights(g, seed);
    }
    return g;
  }

  static WeightSpec from_json(const nlohmann::json& j) {
    WeightSpec w;
    std::string kind = j.value("kind", "unit");
    if (kind == "unit")
      w.kind = Kind::unit;
    else if (kind == "uniform")
      w.kind = Kind::uniform;
    else if (kind == "signs")
      w.kind = Kind::signs;
    else
      throw std::invalid_argument("weights: unknown kind " + kind);
    w.lo = j.value("lo", -1.0);
    w.hi = j.value("hi", 1.0);
    if (w.kind != Kind::unit && !j.contains("seed"))
      throw std::invalid_argument("weights: explicit seed required");
    w.seed = j.value("seed", 0ULL);
    return w;
  }
};

struct InstanceSpec {
  std::string id;
  std::string kind;  // line | erdos_renyi | random_regular | defect_lattice | swap_enhanced | file
  int n = 0;
  double p_edge = 0.3;
  int degree = 3;
  int rows = 0, cols = 0;
  int swap_edge_count = 0;
  std::string path;
  std::uint64_t seed = 0;
  WeightSpec weights;

  static InstanceSpec from_json(const nlohmann::json& j) {
    InstanceSpec s;
    s.id = j.at("id").get<std::string>();
    s.kind = j.at("kind").get<std::string>();
    s.n = j.value("n", 0);
    s.p_edge = j.value("p_edge", 0.3);
    s.degree = j.value("degree", 3);
    s.rows = j.value("rows", 0);
    s.cols = j.value("cols", 0);
    s.swap_edge_count = j.value("swap_edges", 0);
    s.path = j.value("path", "");
    bool needs_seed = s.kind == "erdos_renyi" || s.kind == "random_regular" || s.kind == "swap_enhanced";
    if (needs_seed && !j.contains("seed"))
      throw std::invalid_argument("instance " + s.id + ": explicit seed required");
    s.seed = j.value("seed", 0ULL);
    if (j.contains("weights")) s.weights = WeightSpec::from_json(j.at("weights"));
    return s;
  }
};

/// Induced heavy-hex ball of `n` qubits with `swap_count` strong-matching
/// swap edges, expanded per the swap-enhancement rule.
inline SwapEnhancedResult generate_swap_enhanced_instance(int n, int swap_count, double weight_lo,
                                                          double weight_hi, std::uint64_t seed) {
  HardwareGraph hh = make_heavyhex156();
  if (n < 3 || n > hh.qubits()) throw std::invalid_argument("swap_enhanced: bad vertex count");
  // BFS ball around a central qubit
  int center = hh.qubits() / 2;
  std::vector<int> picked;
  std::vector<char> seen(static_cast<std::size_t>(hh.qubits()), 0);
  std::deque<int> fifo{center};
  seen[static_cast<std::size_t>(center)] = 1;
  while (!fifo.empty() && static_cast<int>(picked.size()) < n) {
    int u = fifo.front();
    fifo.pop_front();
    picked.push_back(u);
    for (int v : hh.neighbors(u))
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        fifo.push_back(v);
      }
  }
  std::sort(picked.begin(), picked.end());
  std::vector<int> local(static_cast<std::size_t>(hh.qubits()), -1);
  for (std::size_t i = 0; i < picked.size(); ++i) local[static_cast<std::size_t>(picked[i])] = static_cast<int>(i);
  std::vector<Edge> edges;
  for (auto [a, b] : hh.edges())
    if (local[static_cast<std::size_t>(a)] >= 0 && local[static_cast<std::size_t>(b)] >= 0)
      edges.push_back({local[static_cast<std::size_t>(a)], local[static_cast<std::size_t>(b)], 1.0});
  WeightedGraph base(n, std::move(edges));

  // greedy strong matching for the swap edges: no vertex adjacent to a swap
  // endpoint may itself touch a swap edge
  auto adj = base.adjacency();
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<int, int>> swaps;
  std::vector<std::size_t> order(base.edges().size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t idx : order) {
    if (static_cast<int>(swaps.size()) >= swap_count) break;
    const auto& e = base.edges()[idx];
    bool ok = !blocked[static_cast<std::size_t>(e.u)] && !blocked[static_cast<std::size_t>(e.v)];
    for (auto endpoint : {e.u, e.v})
      for (auto [nb, w] : adj[static_cast<std::size_t>(endpoint)]) {
        (void)w;
        if (blocked[static_cast<std::size_t>(nb)]) ok = false;
      }
    if (!ok) continue;
    swaps.push_back({e.u, e.v});
    blocked[static_cast<std::size_t>(e.u)] = blocked[static_cast<std::size_t>(e.v)] = 1;
    for (auto endpoint : {e.u, e.v})
      for (auto [nb, w] : adj[static_cast<std::size_t>(endpoint)]) {
        (void)w;
        blocked[static_cast<std::size_t>(nb)] = 1;
      }
  }
  return build_swap_enhanced(base, swaps, weight_lo, weight_hi, derive_seed(seed, 77));
}

inline WeightedGraph generate_instance(const InstanceSpec& spec) {
  WeightedGraph g;
  if (spec.kind == "line") {
    g = make_line_graph(spec.n);
  } else if (spec.kind == "erdos_renyi") {
    g = make_erdos_renyi(spec.n, spec.p_edge, spec.seed);
  } else if (spec.kind == "random_regular") {
    g = make_random_regular(spec.n, spec.degree, spec.seed);
  } else if (spec.kind == "defect_lattice") {
    g = make_defect_lattice(spec.rows > 0 ? spec.rows : 4, spec.cols > 0 ? spec.cols : 4);
  } else if (spec.kind == "swap_enhanced") {
    double lo = 1.0, hi = 1.0;
    if (spec.weights.kind == WeightSpec::Kind::uniform) {
      lo = spec.weights.lo;
      hi = spec.weights.hi;
    }
    auto se = generate_swap_enhanced_instance(spec.n, spec.swap_edge_count, lo, hi, spec.seed);
    WeightedGraph out = se.graph;
    if (spec.weights.kind == WeightSpec::Kind::signs) out = spec.weights.apply(out);
    return out;
  } else if (spec.kind == "file") {
    std::istringstream in(slurp_file(spec.path));
    g = spec.path.size() > 5 && spec.path.substr(spec.path.size() - 5) == ".json"
            ? graph_from_json(nlohmann::json::parse(in.str()))
            : read_graph_text(in);
  } else {
    throw std::invalid_argument("unknown instance kind: " + spec.kind);
  }
  return spec.weights.apply(g);
}

struct PredictionSpec {
  std::string method = "balanced";  // dweight | skatan | balanced | mis | optimize
  double alpha = 0.5;
  int restarts = 5;

  static PredictionSpec from_json(const nlohmann::json& j) {
    PredictionSpec p;
    p.method = j.value("method", p.method);
    p.alpha = j.value("alpha", p.alpha);
    p.restarts = j.value("restarts", p.restarts);
    return p;
  }
};

struct ExperimentSpec {
  std::vector<InstanceSpec> instances;
  std::string problem = "maxcut";  // maxcut | mis
  double lambda = 1.0;
  std::vector<int> p_list = {1, 2, 3};
  long long shots = 1000;
  PredictionSpec prediction;
  std::vector<std::string> filters = {"none"};
  FilterConfig filter_config;
  HeuristicConfig heuristic;
  long long restarts = 1000;
  std::uint64_t sample_seed = 0, pool_seed = 0, heuristic_seed = 0;
  int emulation_cap = kDefaultEmulationCap;
  int max_block = kDefaultEmulationCap;  // partition cap for oversized instances
  int jobs = 0;
  std::string asset_dir;  // empty: default lookup

  static ExperimentSpec from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    for (const auto& inst : j.at("instances")) s.instances.push_back(InstanceSpec::from_json(inst));
    s.problem = j.value("problem", s.problem);
    if (s.problem != "maxcut" && s.problem != "mis")
      throw std::invalid_argument("experiment: problem must be maxcut or mis");
    s.lambda = j.value("lambda", s.lambda);
    if (j.contains("p_list")) s.p_list = j.at("p_list").get<std::vector<int>>();
    s.shots = j.value("shots", s.shots);
    if (j.contains("prediction")) s.prediction = PredictionSpec::from_json(j.at("prediction"));
    if (j.contains("filters")) s.filters = j.at("filters").get<std::vector<std::string>>();
    if (j.contains("filter_config")) s.filter_config = filter_config_from_json(j.at("filter_config"));
    if (j.contains("heuristic")) {
      const auto& h = j.at("heuristic");
      s.heuristic.max_iters = h.value("max_iters", s.heuristic.max_iters);
      s.heuristic.tenure_min = h.value("tenure_min", s.heuristic.tenure_min);
      s.heuristic.tenure_max = h.value("tenure_max", s.heuristic.tenure_max);
      s.heuristic.improvement_cutoff = h.value("improvement_cutoff", s.heuristic.improvement_cutoff);
    }
    s.restarts = j.value("restarts", s.restarts);
    if (!j.contains("seeds"))
      throw std::invalid_argument("experiment: explicit seeds required (no wall-clock defaults)");
    const auto& seeds = j.at("seeds");
    s.sample_seed = seeds.at("sample").get<std::uint64_t>();
    s.pool_seed = seeds.at("pool").get<std::uint64_t>();
    s.heuristic_seed = seeds.at("heuristic").get<std::uint64_t>();
    s.emulation_cap = j.value("emulation_cap", s.emulation_cap);
    s.max_block = j.value("max_block", s.max_block);
    s.jobs = j.value("jobs", 0);
    s.asset_dir = j.value("assets", std::string());
    return s;
  }
};

struct CellResult {
  std::string cell_id;
  std::string instance_id;
  int p = 0;
  std::string filter;
  QFactorReport report;
  FoptCurve fopt_cold, fopt_warm;
  std::vector<double> ar_cold, ar_warm;
  bool ar_valid = false;
  std::string optimum_source = "brute_force";  // or best_known (lower confidence)
  std::string error;
};

struct ReportBundle {
  std::vector<CellResult> cells;
};

namespace experiment_detail {

inline QaoaParams predict_for(const WeightedGraph& g, const std::string& problem, int p,
                              const PredictionSpec& pred, const PredictionTables* tables,
                              const CostDiagonal& diag, std::uint64_t seed) {
  if (pred.method == "optimize") return optimize_params(diag, p, pred.restarts, seed).params;
  if (!tables) throw std::runtime_error("prediction tables not loaded");
  if (pred.method == "mis") return mis_predict(g, p, tables->mis);

  QaoaParams out(std::vector<double>(static_cast<std::size_t>(p), 0.0),
                 std::vector<double>(static_cast<std::size_t>(p), 0.0));
  if (pred.method == "dweight")
    out = dweight_predict(g, p, tables->tree);
  else if (pred.method == "skatan")
    out = skatan_predict(g, p, tables->sk);
  else if (pred.method == "balanced")
    out = balanced_predict(g, p, tables->tree, tables->sk, pred.alpha);
  else
    throw std::invalid_argument("unknown prediction method: " + pred.method);
  if (problem == "maxcut") out = rescale_for_weights(out, g);
  return out;
}

inline SampleSet filter_samples(const SampleSet& s, const std::string& name, const QuboInstance& q,
                                const FilterConfig& cfg) {
  if (name == "none") return s;
  if (name == "energy") return energy_filter(s, q, cfg);
  if (name == "frequency") return frequency_filter(s, cfg);
  if (name == "hamming") return hamming_filter(s, q, cfg);
  throw std::invalid_argument("unknown filter: " + name);
}

/// QAOA sampling for one instance at one layer count. Within the emulation
/// cap this is direct statevector sampling; beyond it the graph is
/// partitioned, each block sampled separately, and stitched strings get
/// their per-block flips re-optimized through the flip QUBO.
inline SampleSet qaoa_samples(const WeightedGraph& g, const std::string& problem, double lambda,
                              int p, const PredictionSpec& pred, const PredictionTables* tables,
                              long long shots, int cap, int max_block, std::uint64_t seed) {
  auto diag_of = [&](const WeightedGraph& graph) {
    return problem == "maxcut" ? maxcut_phase_diagonal(graph, cap) : mis_phase_diagonal(graph, lambda, cap);
  };
  if (g.n() <= cap) {
    CostDiagonal diag = diag_of(g);
    QaoaParams params = predict_for(g, problem, p, pred, tables, diag, derive_seed(seed, 1));
    return sample(qaoa_state(diag, params, cap), shots, derive_seed(seed, 2));
  }

  Partition part = partition_graph(g, max_block, derive_seed(seed, 3));
  std::vector<BlockInstance> blocks;
  std::vector<SampleSet> block_samples;
  for (int b = 0; b < part.blocks; ++b) {
    BlockInstance bi = block_subgraph(g, part, b);
    SampleSet bs;
    if (bi.graph.edge_count() == 0) {
      bs.n = bi.graph.n();
      bs.add(std::string(static_cast<std::size_t>(bi.graph.n()), '0'), shots);
    } else {
      CostDiagonal diag = diag_of(bi.graph);
      QaoaParams params = predict_for(bi.graph, problem, p, pred, tables, diag,
                                      derive_seed(seed, 10 + static_cast<std::uint64_t>(b)));
      bs = sample(qaoa_state(diag, params, cap), shots,
                  derive_seed(seed, 100 + static_cast<std::uint64_t>(b)));
    }
    blocks.push_back(std::move(bi));
    block_samples.push_back(std::move(bs));
  }
  // expand each block's histogram into a shuffled occurrence list, then
  // stitch draw k of every block into one global string
  std::vector<std::vector<std::string>> occurrences;
  for (int b = 0; b < part.blocks; ++b) {
    WarmStartPool pool = WarmStartPool::from_samples(block_samples[static_cast<std::size_t>(b)],
                                                     derive_seed(seed, 200 + static_cast<std::uint64_t>(b)));
    occurrences.push_back(std::move(pool.strings));
  }
  SampleSet out;
  out.n = g.n();
  for (long long k = 0; k < shots; ++k) {
    std::vector<SpinAssignment> locals;
    for (int b = 0; b < part.blocks; ++b) {
      const auto& occ = occurrences[static_cast<std::size_t>(b)];
      locals.push_back(SpinAssignment::from_bits(
          string_to_bits(occ[static_cast<std::size_t>(k % static_cast<long long>(occ.size()))])));
    }
    SpinAssignment stitched = recombine(g, part, locals);
    out.add(bits_to_string(stitched.to_bits()), 1);
  }
  return out;
}

}  // namespace experiment_detail

/// Runs one experiment cell (instance x p x filter).
inline CellResult run_cell(const ExperimentSpec& spec, const InstanceSpec& inst, int p,
                           const std::string& filter, const PredictionTables* tables,
                           std::uint64_t cell_index) {
  CellResult cell;
  cell.instance_id = inst.id;
  cell.p = p;
  cell.filter = filter;
  cell.cell_id = inst.id + "_p" + std::to_string(p) + "_" + filter;
  try {
    WeightedGraph g = generate_instance(inst);
    QuboInstance q = spec.problem == "maxcut" ? maxcut_to_qubo(g) : mis_to_qubo(g, spec.lambda);

    SampleSet samples = experiment_detail::qaoa_samples(
        g, spec.problem, spec.lambda, p, spec.prediction, tables, spec.shots, spec.emulation_cap,
        spec.max_block, derive_seed(spec.sample_seed, cell_index));
    SampleSet filtered = experiment_detail::filter_samples(samples, filter, q, spec.filter_config);

    WarmStartPool warm = WarmStartPool::from_samples(filtered, derive_seed(spec.pool_seed, cell_index),
                                                     filter == "none" ? WarmStartPool::Source::qaoa
                                                                      : WarmStartPool::Source::filtered_qaoa);
    WarmStartPool cold = WarmStartPool::uniform_random(
        g.n(), static_cast<int>(std::min<long long>(spec.restarts, 100000)),
        derive_seed(spec.pool_seed, cell_index + 0x1000));

    HeuristicConfig cfg = spec.heuristic;
    cfg.seed = derive_seed(spec.heuristic_seed, 2 * cell_index);
    RunTrace warm_trace = multistart(q, warm, spec.restarts, cfg);
    cfg.seed = derive_seed(spec.heuristic_seed, 2 * cell_index + 1);
    RunTrace cold_trace = multistart(q, cold, spec.restarts, cfg);

    double optimum_min;
    if (g.n() <= spec.emulation_cap) {
      optimum_min = qubo_phase_diagonal(q, spec.emulation_cap).min_value;
      cell.optimum_source = "brute_force";
    } else {
      optimum_min = std::numeric_limits<double>::infinity();
      for (const auto& trace : {std::cref(warm_trace), std::cref(cold_trace)})
        for (const auto& r : trace.get().restarts) optimum_min = std::min(optimum_min, r.best_cost);
      cell.optimum_source = "best_known";
    }

    cell.report = q_factor(cold_trace, warm_trace, optimum_min, spec.heuristic.max_iters);
    cell.report.instance_id = inst.id;
    cell.report.p = p;
    cell.report.filter = filter;
    cell.report.warm_source = filter == "none" ? "qaoa" : "filtered-qaoa";
    cell.fopt_cold = fopt_curve(cold_trace, optimum_min, spec.heuristic.max_iters);
    cell.fopt_warm = fopt_curve(warm_trace, optimum_min, spec.heuristic.max_iters);

    double optimum_reported = q.report(optimum_min);
    if (optimum_reported > 0.0) {
      cell.ar_cold = approximation_ratio_curve(cold_trace, q, optimum_reported, spec.heuristic.max_iters);
      cell.ar_warm = approximation_ratio_curve(warm_trace, q, optimum_reported, spec.heuristic.max_iters);
      cell.ar_valid = true;
    }
  } catch (const std::exception& ex) {
    cell.error = ex.what();
  }
  return cell;
}

/// Full experiment: all (instance, p, filter) cells, optionally in parallel.
/// Results are deterministic for fixed seeds regardless of the job count.
inline ReportBundle run_experiment(const ExperimentSpec& spec, const PredictionTables* tables) {
  struct CellKey {
    InstanceSpec inst;
    int p;
    std::string filter;
  };
  std::vector<CellKey> keys;
  for (const auto& inst : spec.instances)
    for (int p : spec.p_list)
      for (const auto& f : spec.filters) keys.push_back({inst, p, f});

  ReportBundle bundle;
  bundle.cells.resize(keys.size());
  int jobs = spec.jobs > 0 ? spec.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(keys.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= keys.size()) break;
      bundle.cells[i] =
          run_cell(spec, keys[i].inst, keys[i].p, keys[i].filter, tables, static_cast<std::uint64_t>(i));
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return bundle;
}

// --- report emission -------------------------------------------------------

inline std::string qfactor_csv(const ReportBundle& bundle) {
  std::string out = "instance,p,filter,Q,Rmin_cold,Rmin_warm,Tstar_cold,Tstar_warm\n";
  for (const auto& c : bundle.cells) {
    if (!c.error.empty()) continue;
    out += c.instance_id + "," + std::to_string(c.p) + "," + c.filter + ",";
    out += c.report.q ? format_double(*c.report.q) : std::string("undefined");
    out += "," + (c.report.cold.finite ? format_double(c.report.cold.r_min) : std::string("inf"));
    out += "," + (c.report.warm.finite ? format_double(c.report.warm.r_min) : std::string("inf"));
    out += "," + std::to_string(c.report.cold.t_star);
    out += "," + std::to_string(c.report.warm.t_star);
    out += "\n";
  }
  return out;
}

inline std::string fopt_csv(const CellResult& c) {
  std::string out = "T,fopt_cold,fopt_warm\n";
  for (std::size_t t = 0; t < c.fopt_cold.f.size(); ++t)
    out += std::to_string(t + 1) + "," + format_double(c.fopt_cold.f[t]) + "," +
           format_double(c.fopt_warm.f[t]) + "\n";
  return out;
}

inline std::string ar_csv(const CellResult& c) {
  std::string out = "T,ar_cold,ar_warm\n";
  for (std::size_t t = 0; t < c.ar_cold.size(); ++t)
    out += std::to_string(t + 1) + "," + format_double(c.ar_cold[t]) + "," +
           format_double(c.ar_warm[t]) + "\n";
  return out;
}

inline nlohmann::json bundle_to_json(const ReportBundle& bundle) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : bundle.cells) {
    nlohmann::json j;
    j["cell"] = c.cell_id;
    j["instance"] = c.instance_id;
    j["p"] = c.p;
    j["filter"] = c.filter;
    if (!c.error.empty()) {
      j["error"] = c.error;
    } else {
      if (c.report.q)
        j["Q"] = *c.report.q;
      else
        j["Q"] = nullptr;
      j["Rmin_cold"] = c.report.cold.finite ? nlohmann::json(c.report.cold.r_min) : nlohmann::json(nullptr);
      j["Rmin_warm"] = c.report.warm.finite ? nlohmann::json(c.report.warm.r_min) : nlohmann::json(nullptr);
      j["Tstar_cold"] = c.report.cold.t_star;
      j["Tstar_warm"] = c.report.warm.t_star;
      j["restarts"] = c.report.restarts_cold;
      j["warm_source"] = c.report.warm_source;
      j["optimum_source"] = c.optimum_source;
    }
    cells.push_back(j);
  }
  return nlohmann::json{{"cells", cells}};
}

/// Writes qfactor.csv, per-cell fopt_<id>.csv / ar_<id>.csv, and report.json
/// into `dir` (which must exist). All writes are atomic (temp + rename).
inline void write_report_bundle(const ReportBundle& bundle, const std::string& dir) {
  spill_file(dir + "/qfactor.csv", qfactor_csv(bundle));
  for (const auto& c : bundle.cells) {
    if (!c.error.empty()) continue;
    spill_file(dir + "/fopt_" + c.cell_id + ".csv", fopt_csv(c));
    if (c.ar_valid) spill_file(dir + "/ar_" + c.cell_id + ".csv", ar_csv(c));
  }
  spill_file(dir + "/report.json", bundle_to_json(bundle).dump(1));
}

}  // namespace qeopt
