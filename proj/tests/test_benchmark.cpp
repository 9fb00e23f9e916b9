// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "qeopt/benchmark.hpp"
#include "qeopt/experiment.hpp"

using namespace qeopt;

namespace {

/// Synthetic trace whose restarts hit the optimum at the given iterations
/// (negative: never). The "optimum" is cost 0.
RunTrace synthetic_trace(const std::vector<long long>& hit_iters, long long run_length = 0) {
  RunTrace trace;
  for (long long hit : hit_iters) {
    RestartRecord rec;
    rec.improvements.push_back({0, 1.0});
    if (hit >= 0) {
      if (hit == 0)
        rec.improvements[0].second = 0.0;
      else
        rec.improvements.push_back({hit, 0.0});
      rec.best_cost = 0.0;
      rec.iteration_of_best = hit;
    } else {
      rec.best_cost = 1.0;
    }
    rec.iterations_run = std::max(run_length, hit < 0 ? 10 : hit);
    trace.restarts.push_back(rec);
  }
  return trace;
}

}  // namespace

TEST_CASE("fopt curve construction", "[benchmark]") {
  SECTION("all restarts at the optimum from the start") {
    FoptCurve curve = fopt_curve(synthetic_trace({0, 0, 0}, 5), 0.0);
    for (double f : curve.f) CHECK(f == 1.0);
  }
  SECTION("no restart ever reaches the optimum") {
    FoptCurve curve = fopt_curve(synthetic_trace({-1, -1}, 5), 0.0);
    for (double f : curve.f) CHECK(f == 0.0);
  }
  SECTION("hits at iterations 3, 5 and never") {
    FoptCurve curve = fopt_curve(synthetic_trace({3, 5, -1}, 8), 0.0);
    CHECK(curve.at(1) == Catch::Approx(0.0));
    CHECK(curve.at(3) == Catch::Approx(1.0 / 3.0));
    CHECK(curve.at(4) == Catch::Approx(1.0 / 3.0));
    CHECK(curve.at(5) == Catch::Approx(2.0 / 3.0));
    CHECK(curve.at(8) == Catch::Approx(2.0 / 3.0));
    for (std::size_t t = 1; t < curve.f.size(); ++t) CHECK(curve.f[t] >= curve.f[t - 1]);
  }
}

TEST_CASE("expected runtime", "[benchmark]") {
  SECTION("constant success gives R_min = 1 at T* = 1") {
    FoptCurve curve;
    curve.f.assign(10, 1.0);
    auto er = expected_runtime(curve);
    CHECK(er.r_min == Catch::Approx(1.0));
    CHECK(er.t_star == 1);
  }
  SECTION("tie resolves to the smallest T") {
    // F(1) = 0.1 so C(1) = 10; F(10) = 1 so C(10) = 10
    FoptCurve curve;
    curve.f.assign(10, 0.1);
    for (std::size_t t = 9; t < 10; ++t) curve.f[t] = 1.0;
    auto er = expected_runtime(curve);
    CHECK(er.r_min == Catch::Approx(10.0));
    CHECK(er.t_star == 1);
  }
  SECTION("all-zero curve reports an infinite sentinel") {
    FoptCurve curve;
    curve.f.assign(5, 0.0);
    auto er = expected_runtime(curve);
    CHECK_FALSE(er.finite);
    CHECK(std::isinf(er.r_min));
  }
  SECTION("matches an exhaustive scan on random monotone curves") {
    Rng rng = make_rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      FoptCurve curve;
      double f = 0.0;
      int len = 1 + trial % 60;
      for (int t = 0; t < len; ++t) {
        if (uni(rng) < 0.25) f = std::min(1.0, f + uni(rng) * 0.3);
        curve.f.push_back(f);
      }
      auto er = expected_runtime(curve);
      // oracle: full scan
      double best = std::numeric_limits<double>::infinity();
      long long arg = 0;
      for (long long t = 1; t <= len; ++t) {
        double ft = curve.f[static_cast<std::size_t>(t - 1)];
        if (ft > 0 && static_cast<double>(t) / ft < best) {
          best = static_cast<double>(t) / ft;
          arg = t;
        }
      }
      if (std::isinf(best)) {
        CHECK_FALSE(er.finite);
      } else {
        CHECK(er.r_min == Catch::Approx(best));
        CHECK(er.t_star == arg);
      }
    }
  }
}

TEST_CASE("q factor", "[benchmark]") {
  SECTION("identical traces give Q = 1") {
    RunTrace t = synthetic_trace({2, 4, 6, -1}, 10);
    auto rep = q_factor(t, t, 0.0, 10);
    REQUIRE(rep.q.has_value());
    CHECK(*rep.q == Catch::Approx(1.0));
  }
  SECTION("halving every hit iteration doubles Q") {
    RunTrace cold = synthetic_trace({2, 4, 6, 8}, 10);
    RunTrace warm = synthetic_trace({1, 2, 3, 4}, 10);
    auto rep = q_factor(cold, warm, 0.0, 10);
    REQUIRE(rep.q.has_value());
    CHECK(*rep.q == Catch::Approx(2.0));
  }
  SECTION("infinite runtimes leave Q undefined") {
    RunTrace cold = synthetic_trace({-1, -1}, 5);
    RunTrace warm = synthetic_trace({1, 2}, 5);
    auto rep = q_factor(cold, warm, 0.0, 5);
    CHECK_FALSE(rep.q.has_value());
    CHECK_FALSE(rep.cold.finite);
    CHECK(rep.warm.finite);
  }
  SECTION("Q is invariant under a common iteration-unit rescale") {
    auto scale = [](const RunTrace& t, long long k) {
      RunTrace out = t;
      for (auto& rec : out.restarts) {
        for (auto& [it, c] : rec.improvements) it *= k;
        rec.iterations_run *= k;
        rec.iteration_of_best *= k;
      }
      return out;
    };
    RunTrace cold = synthetic_trace({2, 5, 9, -1}, 12);
    RunTrace warm = synthetic_trace({1, 2, 4, 8}, 12);
    auto rep1 = q_factor(cold, warm, 0.0, 12);
    auto rep3 = q_factor(scale(cold, 3), scale(warm, 3), 0.0, 36);
    REQUIRE(rep1.q.has_value());
    REQUIRE(rep3.q.has_value());
    CHECK(*rep1.q == Catch::Approx(*rep3.q));
  }
}

TEST_CASE("time-based expected runtime", "[benchmark]") {
  SECTION("all hits at 0.01 s") {
    RunTrace trace;
    for (int r = 0; r < 4; ++r) {
      RestartRecord rec;
      rec.timed_improvements = {{0.0, 1.0}, {0.01, 0.0}};
      rec.best_cost = 0.0;
      rec.iterations_run = 10;
      rec.improvements = {{0, 1.0}, {5, 0.0}};
      trace.restarts.push_back(rec);
    }
    auto er = time_expected_runtime(trace, 0.0);
    REQUIRE(er.finite);
    CHECK(er.r_min_seconds == Catch::Approx(0.01));
  }
  SECTION("no hits: infinite sentinel") {
    RunTrace trace = synthetic_trace({-1, -1}, 5);
    auto er = time_expected_runtime(trace, 0.0);
    CHECK_FALSE(er.finite);
  }
  SECTION("iteration and time metrics rank pools identically at constant speed") {
    // per-iteration time of 1 ms: time-based R_min = 0.001 * iteration-based
    auto timed = [](const std::vector<long long>& hits, long long len) {
      RunTrace t = synthetic_trace(hits, len);
      for (auto& rec : t.restarts) {
        rec.timed_improvements.clear();
        for (auto& [it, c] : rec.improvements)
          rec.timed_improvements.push_back({static_cast<double>(it) * 1e-3, c});
      }
      return t;
    };
    RunTrace a = timed({2, 6, 9}, 10), b = timed({1, 3, 5}, 10);
    auto ia = expected_runtime(fopt_curve(a, 0.0, 10));
    auto ib = expected_runtime(fopt_curve(b, 0.0, 10));
    auto ta = time_expected_runtime(a, 0.0);
    auto tb = time_expected_runtime(b, 0.0);
    CHECK((ia.r_min < ib.r_min) == (ta.r_min_seconds < tb.r_min_seconds));
  }
}

TEST_CASE("approximation ratio curve", "[benchmark]") {
  WeightedGraph line = make_line_graph(6);
  QuboInstance q = maxcut_to_qubo(line);  // optimum cut = 5
  SECTION("restart starting at the optimum is flat at 1") {
    RunTrace trace;
    RestartRecord rec;
    rec.improvements = {{0, -5.0}};  // minimization orientation of cut 5
    rec.best_cost = -5.0;
    rec.iterations_run = 4;
    trace.restarts.push_back(rec);
    auto curve = approximation_ratio_curve(trace, q, 5.0, 4);
    for (double v : curve) CHECK(v == Catch::Approx(1.0));
  }
  SECTION("hand-computed medians for two restarts") {
    RunTrace trace;
    RestartRecord a, b;
    a.improvements = {{0, -1.0}, {2, -5.0}};
    a.iterations_run = 4;
    b.improvements = {{0, -3.0}};
    b.iterations_run = 4;
    trace.restarts = {a, b};
    auto curve = approximation_ratio_curve(trace, q, 5.0, 4);
    CHECK(curve[0] == Catch::Approx(0.5 * (1.0 / 5.0 + 3.0 / 5.0)));
    CHECK(curve[2] == Catch::Approx(0.5 * (5.0 / 5.0 + 3.0 / 5.0)));
    // nondecreasing in T
    for (std::size_t t = 1; t < curve.size(); ++t) CHECK(curve[t] >= curve[t - 1] - 1e-12);
  }
  SECTION("non-positive optimum is rejected with guidance") {
    RunTrace trace = synthetic_trace({1}, 3);
    CHECK_THROWS_AS(approximation_ratio_curve(trace, q, 0.0, 3), std::invalid_argument);
  }
}

TEST_CASE("experiment runner end to end", "[benchmark]") {
  nlohmann::json sj = {
      {"instances", {{{"id", "line12"}, {"kind", "line"}, {"n", 12}}}},
      {"problem", "maxcut"},
      {"p_list", {1, 2, 3}},
      {"shots", 600},
      {"prediction", {{"method", "optimize"}, {"restarts", 3}}},
      {"filters", {"none"}},
      {"heuristic", {{"max_iters", 400}}},
      {"restarts", 600},
      {"seeds", {{"sample", 1}, {"pool", 2}, {"heuristic", 3}}},
  };
  ExperimentSpec spec = ExperimentSpec::from_json(sj);
  ReportBundle bundle = run_experiment(spec, nullptr);
  REQUIRE(bundle.cells.size() == 3);  // one row per p
  for (const auto& cell : bundle.cells) {
    INFO(cell.cell_id << " " << cell.error);
    CHECK(cell.error.empty());
    CHECK(cell.report.q.has_value());
  }
  // Q > 1 for p >= 2 on an easy line graph (QAOA warm starts help)
  for (const auto& cell : bundle.cells)
    if (cell.p >= 2) CHECK(*cell.report.q > 1.0);

  SECTION("reruns are byte-identical") {
    ReportBundle again = run_experiment(spec, nullptr);
    CHECK(qfactor_csv(bundle) == qfactor_csv(again));
    for (std::size_t i = 0; i < bundle.cells.size(); ++i)
      CHECK(fopt_csv(bundle.cells[i]) == fopt_csv(again.cells[i]));
  }
  SECTION("missing seeds are rejected") {
    nlohmann::json bad = sj;
    bad.erase("seeds");
    CHECK_THROWS_AS(ExperimentSpec::from_json(bad), std::invalid_argument);
  }
}

TEST_CASE("cold and warm arms use equal restart counts", "[benchmark]") {
  nlohmann::json sj = {
      {"instances", {{{"id", "l8"}, {"kind", "line"}, {"n", 8}}}},
      {"problem", "maxcut"},
      {"p_list", {2}},
      {"shots", 200},
      {"prediction", {{"method", "optimize"}, {"restarts", 2}}},
      {"filters", {"none", "energy"}},
      {"heuristic", {{"max_iters", 200}}},
      {"restarts", 150},
      {"seeds", {{"sample", 4}, {"pool", 5}, {"heuristic", 6}}},
  };
  ReportBundle bundle = run_experiment(ExperimentSpec::from_json(sj), nullptr);
  for (const auto& cell : bundle.cells) {
    REQUIRE(cell.error.empty());
    CHECK(cell.report.restarts_cold == cell.report.restarts_warm);
    CHECK(cell.report.restarts_cold == 150);
  }
}
