// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the quantum-enhanced optimization pipeline:
//   gen         generate problem instances
//   predict     variational-free QAOA angle prediction
//   emulate     statevector QAOA sampling
//   route       qubit mapping and swap-network synthesis
//   filter      sample post-processing
//   solve       warm-startable multistart tabu search
//   solve-large partition, solve blocks, recombine
//   bench       cold-vs-warm Q-factor experiments from a JSON spec
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure (message on
// standard error with a stable "error: <stage>:" prefix).

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qeopt/experiment.hpp"

namespace {

using namespace qeopt;

struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string s, const std::string& what) : std::runtime_error(what), stage(std::move(s)) {}
};

void write_or_print(const std::string& out, const std::string& contents) {
  if (out.empty())
    std::cout << contents;
  else
    spill_file(out, contents);
}

WeightedGraph load_graph(const std::string& path) {
  std::string body = slurp_file(path);
  if (!body.empty() && body.find_first_not_of(" \t\r\n") != std::string::npos &&
      body[body.find_first_not_of(" \t\r\n")] == '{')
    return graph_from_json(nlohmann::json::parse(body));
  std::istringstream in(body);
  return read_graph_text(in);
}

QuboInstance load_qubo(const std::string& path) {
  std::string body = slurp_file(path);
  if (!body.empty() && body.find_first_not_of(" \t\r\n") != std::string::npos &&
      body[body.find_first_not_of(" \t\r\n")] == '{')
    return qubo_from_json(nlohmann::json::parse(body));
  std::istringstream in(body);
  return read_qubo_text(in);
}

SampleSet load_samples(const std::string& path) {
  std::string body = slurp_file(path);
  if (!body.empty() && body.find_first_not_of(" \t\r\n") != std::string::npos &&
      body[body.find_first_not_of(" \t\r\n")] == '{')
    return samples_from_json(nlohmann::json::parse(body));
  std::istringstream in(body);
  return read_samples_text(in);
}

HardwareGraph load_topology(const std::string& spec) {
  if (spec.rfind("grid:", 0) == 0) {
    std::string dims = spec.substr(5);
    auto x = dims.find('x');
    if (x == std::string::npos) throw StageError("topology", "grid spec must be grid:RxC");
    return make_grid_topology(std::stoi(dims.substr(0, x)), std::stoi(dims.substr(x + 1)));
  }
  if (spec == "heavyhex:156" || spec == "heavyhex") return make_heavyhex156();
  if (spec.rfind("file:", 0) == 0)
    return hardware_from_json(nlohmann::json::parse(slurp_file(spec.substr(5))));
  throw StageError("topology", "unknown topology: " + spec);
}

QuboInstance instance_for(const WeightedGraph& g, const std::string& problem, double lambda) {
  if (problem == "maxcut") return maxcut_to_qubo(g);
  if (problem == "mis") return mis_to_qubo(g, lambda);
  throw StageError("problem", "problem must be maxcut or mis");
}

CostDiagonal diagonal_for(const WeightedGraph& g, const std::string& problem, double lambda, int cap) {
  return problem == "maxcut" ? maxcut_phase_diagonal(g, cap) : mis_phase_diagonal(g, lambda, cap);
}

std::vector<double> parse_angle_list(const std::string& csv) {
  std::vector<double> vals;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) vals.push_back(std::stod(tok));
  return vals;
}

std::string trace_csv(const RunTrace& trace, const QuboInstance& q) {
  std::string out = "restart,iter,best_cost,time_s\n";
  for (std::size_t r = 0; r < trace.restarts.size(); ++r) {
    const auto& rec = trace.restarts[r];
    for (std::size_t k = 0; k < rec.improvements.size(); ++k) {
      double t = k < rec.timed_improvements.size() ? rec.timed_improvements[k].first : 0.0;
      out += std::to_string(r) + "," + std::to_string(rec.improvements[k].first) + "," +
             format_double(q.report(rec.improvements[k].second)) + "," + format_double(t) + "\n";
    }
  }
  return out;
}

nlohmann::json trace_json(const RunTrace& trace, const QuboInstance& q) {
  nlohmann::json restarts = nlohmann::json::array();
  for (const auto& rec : trace.restarts) {
    nlohmann::json imp = nlohmann::json::array();
    for (std::size_t k = 0; k < rec.improvements.size(); ++k)
      imp.push_back({{"iter", rec.improvements[k].first},
                     {"best_cost", q.report(rec.improvements[k].second)},
                     {"time_s", k < rec.timed_improvements.size() ? rec.timed_improvements[k].first : 0.0}});
    restarts.push_back({{"start_hash", rec.start_hash},
                        {"iterations", rec.iterations_run},
                        {"best_cost", q.report(rec.best_cost)},
                        {"iteration_of_best", rec.iteration_of_best},
                        {"improvements", imp}});
  }
  return nlohmann::json{{"restarts", restarts}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qeopt: QAOA-warm-started combinatorial optimization pipeline"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a problem instance");
  std::string gen_kind = "line", gen_out, gen_format = "text", gen_wkind = "unit";
  int gen_n = 12, gen_degree = 3, gen_rows = 4, gen_cols = 4, gen_swaps = 4;
  double gen_pedge = 0.3, gen_wlo = -1.0, gen_whi = 1.0;
  std::uint64_t gen_seed = 0, gen_wseed = 0;
  gen->add_option("--kind", gen_kind, "line|erdos_renyi|random_regular|defect_lattice|swap_enhanced");
  gen->add_option("--n", gen_n);
  gen->add_option("--p-edge", gen_pedge);
  gen->add_option("--degree", gen_degree);
  gen->add_option("--rows", gen_rows);
  gen->add_option("--cols", gen_cols);
  gen->add_option("--swap-edges", gen_swaps);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--weights", gen_wkind, "unit|uniform|signs");
  gen->add_option("--wlo", gen_wlo);
  gen->add_option("--whi", gen_whi);
  gen->add_option("--wseed", gen_wseed);
  gen->add_option("--out", gen_out, "output file (stdout when omitted)");
  gen->add_option("--format", gen_format, "text|json");

  // ---- predict ----
  auto* predict = app.add_subcommand("predict", "predict QAOA angles without optimization");
  std::string pr_graph, pr_method = "balanced", pr_assets, pr_format = "text";
  int pr_p = 1;
  double pr_alpha = 0.5;
  bool pr_no_rescale = false;
  predict->add_option("--graph", pr_graph)->required();
  predict->add_option("--method", pr_method, "dweight|skatan|balanced|mis");
  predict->add_option("--p", pr_p);
  predict->add_option("--alpha", pr_alpha);
  predict->add_option("--assets", pr_assets, "parameter-table directory (default: QEOPT_ASSETS or ./assets)");
  predict->add_flag("--no-weight-rescale", pr_no_rescale, "skip the RMS edge-weight rescaling of gamma");
  predict->add_option("--format", pr_format, "text|json");

  // ---- emulate ----
  auto* emulate = app.add_subcommand("emulate", "QAOA statevector sampling");
  std::string em_graph, em_problem = "maxcut", em_angles, em_predict, em_out, em_format = "text", em_assets;
  int em_p = 1, em_cap = kDefaultEmulationCap;
  double em_lambda = 1.0, em_alpha = 0.5;
  long long em_shots = 1000;
  std::uint64_t em_seed = 0;
  bool em_optimize = false;
  emulate->add_option("--graph", em_graph)->required();
  emulate->add_option("--problem", em_problem, "maxcut|mis");
  emulate->add_option("--lambda", em_lambda);
  emulate->add_option("--p", em_p);
  emulate->add_option("--angles", em_angles, "gamma1,beta1,gamma2,beta2,...");
  emulate->add_option("--predict", em_predict, "predict angles: dweight|skatan|balanced|mis");
  emulate->add_option("--alpha", em_alpha);
  emulate->add_option("--assets", em_assets);
  emulate->add_flag("--optimize", em_optimize, "locally optimize the angles instead");
  emulate->add_option("--shots", em_shots);
  emulate->add_option("--seed", em_seed);
  emulate->add_option("--cap", em_cap, "emulation cap (largest simulable vertex count)");
  emulate->add_option("--out", em_out);
  emulate->add_option("--format", em_format, "text|json");

  // ---- route ----
  auto* route = app.add_subcommand("route", "map and route one QAOA cost layer");
  std::string rt_graph, rt_topology = "grid:6x6", rt_method = "greedy", rt_layout = "qap", rt_out;
  std::string rt_cost_mode = "swaps";
  int rt_iterations = 1;
  double rt_q = 1.0;
  long long rt_beam = 50000;
  std::uint64_t rt_seed = 0;
  bool rt_no_merge = false;
  route->add_option("--graph", rt_graph)->required();
  route->add_option("--topology", rt_topology, "grid:RxC | heavyhex:156 | file:PATH");
  route->add_option("--method", rt_method, "greedy|astar");
  route->add_option("--layout", rt_layout, "fiedler|qap|random");
  route->add_option("--iterations", rt_iterations, "mapping refinement iterations");
  route->add_option("--q", rt_q, "distance-decay exponent");
  route->add_option("--cost-mode", rt_cost_mode, "swaps|depth (astar)");
  route->add_option("--beam", rt_beam, "astar expansion budget");
  route->add_option("--seed", rt_seed);
  route->add_flag("--no-merge", rt_no_merge, "skip swap+term merging");
  route->add_option("--out", rt_out);

  // ---- filter ----
  auto* filter = app.add_subcommand("filter", "post-process a sample set");
  std::string fl_kind = "energy", fl_in, fl_out, fl_config, fl_graph, fl_qubo, fl_problem = "maxcut";
  std::string fl_model, fl_format = "text";
  double fl_lambda = 1.0;
  filter->add_option("--kind", fl_kind, "readout|energy|frequency|hamming");
  filter->add_option("--in", fl_in)->required();
  filter->add_option("--out", fl_out);
  filter->add_option("--config", fl_config, "FilterConfig JSON");
  filter->add_option("--graph", fl_graph, "problem graph (energy/hamming)");
  filter->add_option("--qubo", fl_qubo, "QUBO file (energy/hamming)");
  filter->add_option("--problem", fl_problem, "maxcut|mis (with --graph)");
  filter->add_option("--lambda", fl_lambda);
  filter->add_option("--readout-model", fl_model, "ReadoutModel JSON (readout)");
  filter->add_option("--format", fl_format, "text|json");

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "multistart tabu search");
  std::string sv_graph, sv_qubo, sv_problem = "maxcut", sv_warmstart = "random", sv_out, sv_format = "csv";
  std::string sv_heuristic = "tabu";
  double sv_lambda = 1.0, sv_time_limit = 0.0;
  long long sv_restarts = 100, sv_max_iters = 500, sv_repetitions = 100;
  std::uint64_t sv_seed = 0;
  solve->add_option("--graph", sv_graph);
  solve->add_option("--qubo", sv_qubo);
  solve->add_option("--problem", sv_problem, "maxcut|mis (with --graph)");
  solve->add_option("--lambda", sv_lambda);
  solve->add_option("--heuristic", sv_heuristic, "tabu|local");
  solve->add_option("--warmstart", sv_warmstart, "random | sample-set file");
  solve->add_option("--restarts", sv_restarts);
  solve->add_option("--max-iters", sv_max_iters);
  solve->add_option("--time-limit", sv_time_limit, "resource-pool mode: seconds per optimization");
  solve->add_option("--repetitions", sv_repetitions, "timed-mode repetitions");
  solve->add_option("--seed", sv_seed);
  solve->add_option("--out", sv_out, "output path (stdout when omitted)");
  solve->add_option("--format", sv_format, "csv|json");

  // ---- solve-large ----
  auto* large = app.add_subcommand("solve-large", "partition, solve blocks, recombine");
  std::string lg_graph, lg_problem = "maxcut", lg_blocks_out, lg_predict = "balanced", lg_assets;
  int lg_max_block = kDefaultEmulationCap, lg_p = 2;
  double lg_lambda = 1.0;
  long long lg_shots = 1000, lg_restarts = 100, lg_max_iters = 2000;
  std::uint64_t lg_seed = 0;
  large->add_option("--graph", lg_graph)->required();
  large->add_option("--problem", lg_problem, "maxcut|mis");
  large->add_option("--lambda", lg_lambda);
  large->add_option("--max-block", lg_max_block);
  large->add_option("--blocks-out", lg_blocks_out, "directory for partition and block artifacts");
  large->add_option("--p", lg_p);
  large->add_option("--shots", lg_shots);
  large->add_option("--predict", lg_predict, "dweight|skatan|balanced|mis|optimize");
  large->add_option("--assets", lg_assets);
  large->add_option("--restarts", lg_restarts);
  large->add_option("--max-iters", lg_max_iters);
  large->add_option("--seed", lg_seed);

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "run a Q-factor experiment spec");
  std::string bn_spec, bn_out = ".";
  int bn_jobs = 0;
  bench->add_option("--spec", bn_spec)->required();
  bench->add_option("--out", bn_out, "output directory");
  bench->add_option("--jobs", bn_jobs, "worker threads (default: cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::string stage = "run";
  try {
    if (*gen) {
      stage = "gen";
      WeightedGraph g;
      if (gen_kind == "line") {
        g = make_line_graph(gen_n);
      } else if (gen_kind == "erdos_renyi") {
        g = make_erdos_renyi(gen_n, gen_pedge, gen_seed);
      } else if (gen_kind == "random_regular") {
        g = make_random_regular(gen_n, gen_degree, gen_seed);
      } else if (gen_kind == "defect_lattice") {
        g = make_defect_lattice(gen_rows, gen_cols);
      } else if (gen_kind == "swap_enhanced") {
        double lo = gen_wkind == "uniform" ? gen_wlo : 1.0;
        double hi = gen_wkind == "uniform" ? gen_whi : 1.0;
        g = generate_swap_enhanced_instance(gen_n, gen_swaps, lo, hi, gen_seed).graph;
      } else {
        throw std::invalid_argument("unknown kind: " + gen_kind);
      }
      if (gen_kind != "swap_enhanced") {
        if (gen_wkind == "uniform")
          g = with_uniform_weights(g, gen_wlo, gen_whi, gen_wseed);
        else if (gen_wkind == "signs")
          g = with_sign_weights(g, gen_wseed);
        else if (gen_wkind != "unit")
          throw std::invalid_argument("unknown weights kind: " + gen_wkind);
      }
      if (gen_format == "json") {
        write_or_print(gen_out, graph_to_json(g).dump(1) + "\n");
      } else {
        std::ostringstream os;
        write_graph_text(os, g);
        write_or_print(gen_out, os.str());
      }
    } else if (*predict) {
      stage = "predict";
      WeightedGraph g = load_graph(pr_graph);
      PredictionTables tables = load_prediction_tables(pr_assets.empty() ? asset_directory() : pr_assets);
      QaoaParams params(std::vector<double>(static_cast<std::size_t>(pr_p), 0.0),
                        std::vector<double>(static_cast<std::size_t>(pr_p), 0.0));
      if (pr_method == "dweight")
        params = dweight_predict(g, pr_p, tables.tree);
      else if (pr_method == "skatan")
        params = skatan_predict(g, pr_p, tables.sk);
      else if (pr_method == "balanced")
        params = balanced_predict(g, pr_p, tables.tree, tables.sk, pr_alpha);
      else if (pr_method == "mis")
        params = mis_predict(g, pr_p, tables.mis);
      else
        throw std::invalid_argument("unknown method: " + pr_method);
      if (pr_method != "mis" && !pr_no_rescale) params = rescale_for_weights(params, g);
      if (pr_format == "json") {
        std::cout << nlohmann::json{{"p", params.p}, {"gammas", params.gammas}, {"betas", params.betas}}.dump(1)
                  << "\n";
      } else {
        std::cout << "gamma:";
        for (double v : params.gammas) std::cout << ' ' << format_double(v);
        std::cout << "\nbeta:";
        for (double v : params.betas) std::cout << ' ' << format_double(v);
        std::cout << "\n";
      }
    } else if (*emulate) {
      stage = "emulate";
      WeightedGraph g = load_graph(em_graph);
      CostDiagonal diag = diagonal_for(g, em_problem, em_lambda, em_cap);
      QaoaParams params(std::vector<double>(static_cast<std::size_t>(em_p), 0.0),
                        std::vector<double>(static_cast<std::size_t>(em_p), 0.0));
      if (!em_angles.empty()) {
        auto flat = parse_angle_list(em_angles);
        if (flat.size() != 2 * static_cast<std::size_t>(em_p))
          throw std::invalid_argument("--angles needs 2*p values: gamma1,beta1,...");
        std::vector<double> gs, bs;
        for (std::size_t k = 0; k < flat.size(); k += 2) {
          gs.push_back(flat[k]);
          bs.push_back(flat[k + 1]);
        }
        params = QaoaParams(gs, bs);
      } else if (em_optimize) {
        params = optimize_params(diag, em_p, 5, em_seed).params;
      } else {
        std::string method = em_predict.empty() ? (em_problem == "mis" ? "mis" : "balanced") : em_predict;
        PredictionTables tables = load_prediction_tables(em_assets.empty() ? asset_directory() : em_assets);
        PredictionSpec pspec;
        pspec.method = method;
        pspec.alpha = em_alpha;
        params = experiment_detail::predict_for(g, em_problem, em_p, pspec, &tables, diag, em_seed);
      }
      Statevector state = qaoa_state(diag, params, em_cap);
      SampleSet samples = sample(state, em_shots, em_seed);
      double energy = expectation(state, diag);
      std::cerr << "energy=" << format_double(energy) << " ar_star=" << format_double(ar_star(energy, diag))
                << "\n";
      if (em_format == "json") {
        write_or_print(em_out, samples_to_json(samples).dump(1) + "\n");
      } else {
        std::ostringstream os;
        write_samples_text(os, samples);
        write_or_print(em_out, os.str());
      }
    } else if (*route) {
      stage = "route";
      WeightedGraph g = load_graph(rt_graph);
      HardwareGraph h = load_topology(rt_topology);
      QubitMapping m0;
      if (rt_layout == "fiedler")
        m0 = fiedler_layout(g, h);
      else if (rt_layout == "qap")
        m0 = qap_layout(g, h, rt_seed);
      else if (rt_layout == "random")
        m0 = random_layout(g, h, rt_seed);
      else
        throw std::invalid_argument("unknown layout: " + rt_layout);
      RouterConfig router;
      router.use_astar = rt_method == "astar";
      if (!router.use_astar && rt_method != "greedy")
        throw std::invalid_argument("unknown method: " + rt_method);
      router.q_exponent = rt_q;
      router.cost_mode = rt_cost_mode == "depth" ? AstarCost::depth : AstarCost::swaps;
      router.beam_limit = rt_beam;
      RoutedCircuit circuit;
      if (rt_iterations > 1) {
        circuit = iterate_mapping(g, h, m0, router, rt_iterations).second;
        if (rt_no_merge) circuit = router.route(g, h, circuit.initial);
      } else {
        circuit = router.route(g, h, m0);
        if (!rt_no_merge) circuit = merge_swap_zz(circuit);
      }
      validate_routed_circuit(circuit, g, h);
      auto metrics = circuit_metrics(circuit);
      write_or_print(rt_out, routed_circuit_to_json(circuit).dump(1) + "\n");
      std::cout << "swaps=" << metrics.swaps << " cnots=" << metrics.cnots << " depth=" << metrics.depth
                << "\n";
    } else if (*filter) {
      stage = "filter";
      SampleSet in = load_samples(fl_in);
      FilterConfig cfg;
      if (!fl_config.empty()) cfg = filter_config_from_json(nlohmann::json::parse(slurp_file(fl_config)));
      SampleSet out;
      if (fl_kind == "readout") {
        if (fl_model.empty()) throw std::invalid_argument("readout filter needs --readout-model");
        ReadoutModel model = readout_model_from_json(nlohmann::json::parse(slurp_file(fl_model)));
        out = readout_correct(in, model, cfg.readout_radius);
      } else if (fl_kind == "frequency") {
        out = frequency_filter(in, cfg);
      } else if (fl_kind == "energy" || fl_kind == "hamming") {
        QuboInstance q = !fl_qubo.empty() ? load_qubo(fl_qubo)
                                          : instance_for(load_graph(fl_graph), fl_problem, fl_lambda);
        out = fl_kind == "energy" ? energy_filter(in, q, cfg) : hamming_filter(in, q, cfg);
      } else {
        throw std::invalid_argument("unknown filter kind: " + fl_kind);
      }
      if (fl_format == "json") {
        write_or_print(fl_out, samples_to_json(out).dump(1) + "\n");
      } else {
        std::ostringstream os;
        write_samples_text(os, out);
        write_or_print(fl_out, os.str());
      }
    } else if (*solve) {
      stage = "solve";
      QuboInstance q = !sv_qubo.empty() ? load_qubo(sv_qubo)
                                        : instance_for(load_graph(sv_graph), sv_problem, sv_lambda);
      HeuristicConfig cfg;
      cfg.max_iters = sv_max_iters;
      cfg.seed = sv_seed;
      WarmStartPool pool;
      if (sv_warmstart == "random")
        pool = WarmStartPool::uniform_random(q.n(), static_cast<int>(std::min<long long>(sv_restarts, 100000)),
                                             derive_seed(sv_seed, 0xF001));
      else
        pool = WarmStartPool::from_samples(load_samples(sv_warmstart), derive_seed(sv_seed, 0xF001));
      RunTrace trace;
      if (sv_heuristic == "local") {
        for (long long r = 0; r < sv_restarts; ++r) {
          Rng rng = make_rng(sv_seed, static_cast<std::uint64_t>(r));
          auto [x, cost, rec] = local_search_baseline(q, string_to_bits(pool.draw(r, rng)), cfg);
          (void)x;
          (void)cost;
          trace.restarts.push_back(rec);
        }
      } else if (sv_time_limit > 0.0) {
        trace = timed_multistart(q, pool, sv_time_limit, sv_repetitions, cfg);
      } else {
        trace = multistart(q, pool, sv_restarts, cfg);
      }
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : trace.restarts) best = std::min(best, r.best_cost);
      std::cerr << "best=" << format_double(q.report(best)) << " restarts=" << trace.restarts.size() << "\n";
      if (sv_format == "json")
        write_or_print(sv_out, trace_json(trace, q).dump(1) + "\n");
      else
        write_or_print(sv_out, trace_csv(trace, q));
    } else if (*large) {
      stage = "solve-large";
      WeightedGraph g = load_graph(lg_graph);
      QuboInstance q = instance_for(g, lg_problem, lg_lambda);
      Partition part = partition_graph(g, lg_max_block, lg_seed);
      const PredictionTables* tables_ptr = nullptr;
      PredictionTables tables;
      if (lg_predict != "optimize") {
        tables = load_prediction_tables(lg_assets.empty() ? asset_directory() : lg_assets);
        tables_ptr = &tables;
      }
      PredictionSpec pspec;
      pspec.method = lg_predict;
      HeuristicConfig cfg;
      cfg.max_iters = lg_max_iters;
      std::vector<SpinAssignment> locals;
      for (int b = 0; b < part.blocks; ++b) {
        BlockInstance bi = block_subgraph(g, part, b);
        QuboInstance bq = instance_for(bi.graph, lg_problem, lg_lambda);
        WarmStartPool pool;
        if (bi.graph.edge_count() > 0 && bi.graph.n() <= kDefaultEmulationCap) {
          CostDiagonal diag = diagonal_for(bi.graph, lg_problem, lg_lambda, kDefaultEmulationCap);
          QaoaParams params = experiment_detail::predict_for(
              bi.graph, lg_problem, lg_p, pspec, tables_ptr, diag, derive_seed(lg_seed, 300 + b));
          SampleSet samples =
              sample(qaoa_state(diag, params), lg_shots, derive_seed(lg_seed, 400 + b));
          pool = WarmStartPool::from_samples(samples, derive_seed(lg_seed, 500 + b));
        } else {
          pool = WarmStartPool::uniform_random(bi.graph.n(), static_cast<int>(lg_restarts),
                                               derive_seed(lg_seed, 600 + b));
        }
        cfg.seed = derive_seed(lg_seed, 700 + b);
        RunTrace trace = multistart(bq, pool, lg_restarts, cfg);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_r = 0;
        for (std::size_t r = 0; r < trace.restarts.size(); ++r)
          if (trace.restarts[r].best_cost < best) best = trace.restarts[r].best_cost;
        // re-run the best restart to recover its solution string
        std::vector<std::uint8_t> best_x;
        for (std::size_t r = 0; r < trace.restarts.size(); ++r)
          if (trace.restarts[r].best_cost == best) {
            Rng rng = make_rng(cfg.seed, 0xB00C);
            HeuristicConfig one = cfg;
            one.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
            auto [x, cost, rec] = tabu_search(bq, string_to_bits(pool.draw(static_cast<long long>(r), rng)), one);
            (void)cost;
            (void)rec;
            best_x = x;
            best_r = r;
            break;
          }
        (void)best_r;
        locals.push_back(SpinAssignment::from_bits(best_x));
      }
      SpinAssignment full = recombine(g, part, locals, cfg);
      double objective = q.objective(full.to_bits());
      std::cout << "blocks=" << part.blocks << " cut_edges=" << part.cut_edges.size()
                << " objective=" << format_double(objective) << "\n";
      if (!lg_blocks_out.empty()) {
        std::filesystem::create_directories(lg_blocks_out);
        spill_file(lg_blocks_out + "/partition.json", partition_to_json(part).dump(1));
        spill_file(lg_blocks_out + "/assignment.txt", bits_to_string(full.to_bits()) + "\n");
      }
    } else if (*bench) {
      stage = "bench";
      nlohmann::json spec_json;
      try {
        spec_json = nlohmann::json::parse(slurp_file(bn_spec));
      } catch (const std::exception& ex) {
        throw StageError("spec", ex.what());
      }
      ExperimentSpec spec;
      try {
        spec = ExperimentSpec::from_json(spec_json);
      } catch (const std::exception& ex) {
        throw StageError("spec", ex.what());
      }
      if (bn_jobs > 0) spec.jobs = bn_jobs;
      PredictionTables tables;
      const PredictionTables* tables_ptr = nullptr;
      if (spec.prediction.method != "optimize") {
        tables = load_prediction_tables(spec.asset_dir.empty() ? asset_directory() : spec.asset_dir);
        tables_ptr = &tables;
      }
      std::filesystem::create_directories(bn_out);
      ReportBundle bundle = run_experiment(spec, tables_ptr);
      write_report_bundle(bundle, bn_out);
      int failures = 0;
      for (const auto& c : bundle.cells)
        if (!c.error.empty()) {
          std::cerr << "cell " << c.cell_id << " failed: " << c.error << "\n";
          failures++;
        }
      std::cout << "cells=" << bundle.cells.size() << " failed=" << failures << " out=" << bn_out << "\n";
      if (failures == static_cast<int>(bundle.cells.size()) && failures > 0)
        throw std::runtime_error("every experiment cell failed");
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.stage << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << stage << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
