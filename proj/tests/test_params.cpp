// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "qeopt/params.hpp"

using namespace qeopt;

namespace {

// Small tables built once and shared across the test cases in this file.
const TreeParamTable& small_tree_table() {
  static TreeParamTable table = [] {
    TreeTableBuildOptions opts;
    opts.degrees = {1, 2, 3, 4, 5, 6};
    opts.max_p = 3;
    opts.proxy_n = 10;
    opts.restarts = 2;
    opts.girth_candidates = 3;
    opts.seed = 11;
    return build_tree_table(opts);
  }();
  return table;
}

const SkParamTable& small_sk_table() {
  static SkParamTable table = [] {
    SkTableBuildOptions opts;
    opts.n = 10;
    opts.instances = 4;
    opts.max_p = 3;
    opts.restarts = 2;
    opts.seed = 12;
    return build_sk_table(opts);
  }();
  return table;
}

}  // namespace

TEST_CASE("degree profile weights", "[params]") {
  // star K_{1,3}: hub degree 3 (weight 1/2), three leaves degree 1 (weight 1/2)
  WeightedGraph star(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
  auto prof = DegreeProfile::of(star);
  CHECK(prof.mean_degree == Catch::Approx(1.5));
  CHECK(prof.weights.at(3) == Catch::Approx(0.5));
  CHECK(prof.weights.at(1) == Catch::Approx(0.5));
  double total = 0.0;
  for (auto [d, w] : prof.weights) total += w;
  CHECK(total == Catch::Approx(1.0));
  CHECK_THROWS_AS(DegreeProfile::of(WeightedGraph(3, {})), std::invalid_argument);
}

TEST_CASE("tree table: single-edge cell matches direct optimization", "[params]") {
  const auto& table = small_tree_table();
  WeightedGraph edge(2, {{0, 1, 1.0}});
  CostDiagonal diag = maxcut_phase_diagonal(edge);
  auto direct = optimize_params(diag, 1, 3, 5);
  const auto& row = table.rows.at({1, 1});
  double table_energy = expectation(qaoa_state(diag, QaoaParams(row.gammas, row.betas)), diag);
  CHECK(table_energy == Catch::Approx(direct.energy).margin(1e-3));
}

TEST_CASE("tree table gamma_1 decreases with degree", "[params]") {
  const auto& table = small_tree_table();
  double prev = 1e9;
  for (int d = 2; d <= 6; ++d) {
    double g1 = table.rows.at({d, 1}).gammas[0];
    CHECK(g1 < prev + 1e-9);
    prev = g1;
  }
  // the arctan trend itself decreases too
  CHECK(std::atan(1.0 / std::sqrt(2.0)) < std::atan(1.0));
}

TEST_CASE("tree table rebuild with another seed moves angles only slightly", "[params]") {
  TreeTableBuildOptions opts;
  opts.degrees = {3};
  opts.max_p = 2;
  opts.proxy_n = 10;
  opts.restarts = 2;
  opts.girth_candidates = 3;
  opts.seed = 21;
  TreeParamTable a = build_tree_table(opts);
  opts.seed = 22;
  TreeParamTable b = build_tree_table(opts);
  for (int p = 1; p <= 2; ++p) {
    const auto& ra = a.rows.at({3, p});
    const auto& rb = b.rows.at({3, p});
    for (int j = 0; j < p; ++j) {
      CHECK(std::fabs(ra.gammas[static_cast<std::size_t>(j)] -
                      rb.gammas[static_cast<std::size_t>(j)]) < 1e-2);
      CHECK(std::fabs(ra.betas[static_cast<std::size_t>(j)] -
                      rb.betas[static_cast<std::size_t>(j)]) < 1e-2);
    }
  }
}

TEST_CASE("dweight prediction", "[params]") {
  const auto& table = small_tree_table();
  SECTION("regular graph hits the table row exactly") {
    WeightedGraph g = make_random_regular(10, 4, 31);
    QaoaParams pred = dweight_predict(g, 2, table);
    const auto& row = table.rows.at({4, 2});
    for (int j = 0; j < 2; ++j) {
      std::size_t sj = static_cast<std::size_t>(j);
      CHECK(pred.gammas[sj] == Catch::Approx(row.gammas[sj]));
      CHECK(pred.betas[sj] == Catch::Approx(row.betas[sj]));
    }
  }
  SECTION("star graph averages the d=3 and d=1 rows") {
    WeightedGraph star(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
    QaoaParams pred = dweight_predict(star, 1, table);
    double expect_gamma = 0.5 * table.rows.at({3, 1}).gammas[0] + 0.5 * table.rows.at({1, 1}).gammas[0];
    CHECK(pred.gammas[0] == Catch::Approx(expect_gamma));
  }
  SECTION("unseen degree interpolates within the bracketing rows") {
    // degree 5 removed from a copy of the table to force interpolation
    TreeParamTable table2 = table;
    for (int p = 1; p <= 3; ++p) table2.rows.erase({5, p});
    ParamRow interp = table2.row_for(5, 1);
    const auto& lo = table2.rows.at({4, 1});
    const auto& hi = table2.rows.at({6, 1});
    CHECK(interp.gammas[0] >= std::min(lo.gammas[0], hi.gammas[0]) - 1e-12);
    CHECK(interp.gammas[0] <= std::max(lo.gammas[0], hi.gammas[0]) + 1e-12);
    CHECK(std::isfinite(interp.betas[0]));
  }
  SECTION("p outside coverage is rejected") {
    WeightedGraph g = make_random_regular(10, 4, 31);
    CHECK_THROWS_AS(dweight_predict(g, 9, table), std::invalid_argument);
  }
}

TEST_CASE("skatan prediction", "[params]") {
  const auto& sk = small_sk_table();
  SECTION("mean degree 2 scales gamma by pi/4") {
    WeightedGraph ring(8, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1},
                           {4, 5, 1}, {5, 6, 1}, {6, 7, 1}, {0, 7, 1}});
    QaoaParams pred = skatan_predict(ring, 2, sk);
    const auto& row = sk.rows.at(2);
    for (int j = 0; j < 2; ++j) {
      std::size_t sj = static_cast<std::size_t>(j);
      CHECK(pred.gammas[sj] == Catch::Approx(row.gammas[sj] * (kPi / 4.0)));
      CHECK(pred.betas[sj] == Catch::Approx(row.betas[sj]));  // beta passes through
    }
  }
  SECTION("large-degree scale behaves like 1/sqrt(d)") {
    double scale100 = std::atan(1.0 / std::sqrt(99.0));
    CHECK(scale100 == Catch::Approx(1.0 / std::sqrt(100.0)).epsilon(0.01));
  }
  SECTION("mean degree at most 1 is rejected") {
    WeightedGraph edge(2, {{0, 1, 1.0}});
    CHECK_THROWS_AS(skatan_predict(edge, 1, sk), std::invalid_argument);
  }
}

TEST_CASE("balanced prediction interpolates its two ingredients", "[params]") {
  const auto& tree = small_tree_table();
  const auto& sk = small_sk_table();
  WeightedGraph g = make_random_regular(10, 4, 53);
  QaoaParams dw = dweight_predict(g, 2, tree);
  QaoaParams sa = skatan_predict(g, 2, sk);
  QaoaParams b0 = balanced_predict(g, 2, tree, sk, 0.0);
  QaoaParams b1 = balanced_predict(g, 2, tree, sk, 1.0);
  QaoaParams bh = balanced_predict(g, 2, tree, sk, 0.5);
  for (int j = 0; j < 2; ++j) {
    std::size_t sj = static_cast<std::size_t>(j);
    CHECK(b0.gammas[sj] == Catch::Approx(dw.gammas[sj]));
    CHECK(b1.gammas[sj] == Catch::Approx(sa.gammas[sj]));
    CHECK(bh.gammas[sj] == Catch::Approx(0.5 * (dw.gammas[sj] + sa.gammas[sj])));
    CHECK(bh.betas[sj] == Catch::Approx(0.5 * (dw.betas[sj] + sa.betas[sj])));
  }
  CHECK_THROWS_AS(balanced_predict(g, 2, tree, sk, 1.5), std::invalid_argument);
}

TEST_CASE("weight rescaling of gamma", "[params]") {
  QaoaParams params({0.4, 0.2}, {0.3, 0.1});
  SECTION("unit and sign weights leave angles unchanged") {
    WeightedGraph g(3, {{0, 1, 1.0}, {1, 2, -1.0}});
    QaoaParams out = rescale_for_weights(params, g);
    CHECK(out.gammas[0] == Catch::Approx(0.4));
    CHECK(out.gammas[1] == Catch::Approx(0.2));
  }
  SECTION("uniform weight 2 halves gamma") {
    WeightedGraph g(3, {{0, 1, 2.0}, {1, 2, 2.0}});
    QaoaParams out = rescale_for_weights(params, g);
    CHECK(out.gammas[0] == Catch::Approx(0.2));
    CHECK(out.betas[0] == Catch::Approx(0.3));
  }
  SECTION("mixed weights divide by the RMS") {
    WeightedGraph g(5, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 2.0}, {3, 4, 1.0}});
    QaoaParams out = rescale_for_weights(params, g);
    CHECK(out.gammas[0] == Catch::Approx(0.4 / std::sqrt(10.0 / 4.0)));
  }
  SECTION("graphs without edges are rejected") {
    CHECK_THROWS_AS(rescale_for_weights(params, WeightedGraph(3, {})), std::invalid_argument);
  }
  SECTION("scaling weights by k scales predicted gamma by 1/k") {
    WeightedGraph g = with_uniform_weights(make_erdos_renyi(8, 0.5, 3), 0.5, 1.5, 4);
    std::vector<Edge> scaled = g.edges();
    for (auto& e : scaled) e.w *= 3.0;
    WeightedGraph g3(8, std::move(scaled));
    QaoaParams a = rescale_for_weights(params, g);
    QaoaParams b = rescale_for_weights(params, g3);
    CHECK(b.gammas[0] == Catch::Approx(a.gammas[0] / 3.0));
  }
}

TEST_CASE("mis gamma curve fit recovers exact synthetic coefficients", "[params]") {
  // data generated exactly from the model
  std::array<double, 4> truth = {0.3, 1.2, 1.4, 0.8};
  std::vector<double> ds, gs;
  for (int i = 0; i < 40; ++i) {
    double d = 1.0 + 0.3 * i;
    ds.push_back(d);
    gs.push_back(truth[0] + truth[1] / (std::pow(d, truth[2]) + truth[3]));
  }
  MisFitResult fit = fit_mis_gamma_curve(ds, gs);
  for (std::size_t i = 0; i < 4; ++i) CHECK(fit.coeffs[i] == Catch::Approx(truth[i]).margin(1e-6));
  CHECK(fit.coeffs[2] > 0.0);
  CHECK(fit.rms_residual < 1e-7);
}

TEST_CASE("mis fit table construction and prediction", "[params]") {
  MisTableBuildOptions opts;
  opts.sizes = {8, 9, 10};
  opts.graphs_total = 30;
  opts.max_p = 2;
  opts.restarts = 2;
  opts.seed = 77;
  MisFitTable table = fit_mis_tables(opts);

  SECTION("beta rows exist for every degree up to the cap") {
    for (int d = 1; d <= MisFitTable::kDegreeCap; ++d)
      for (int p = 1; p <= 2; ++p) {
        REQUIRE(table.beta_rows.count({d, p}) == 1);
        CHECK(table.beta_rows.at({d, p}).size() == static_cast<std::size_t>(p));
      }
  }
  SECTION("fitted first-layer curve is monotone over the degree range") {
    const auto& c = table.gamma_coeffs.at({2, 0});
    double prev = c[0] + c[1] / (std::pow(1.0, c[2]) + c[3]);
    bool increasing = true, decreasing = true;
    for (double d = 1.5; d <= 12.0; d += 0.5) {
      double v = c[0] + c[1] / (std::pow(d, c[2]) + c[3]);
      increasing &= v >= prev - 1e-12;
      decreasing &= v <= prev + 1e-12;
      prev = v;
    }
    CHECK((increasing || decreasing));
  }
  SECTION("degree cap applies to the beta lookup") {
    WeightedGraph dense = make_complete_graph(16);  // mean degree 15 caps at 12
    QaoaParams pred = mis_predict(dense, 2, table);
    const auto& row = table.beta_rows.at({12, 2});
    for (std::size_t j = 0; j < 2; ++j) CHECK(pred.betas[j] == Catch::Approx(row[j]));
  }
  SECTION("isomorphic graphs predict identically") {
    WeightedGraph g = make_erdos_renyi(10, 0.4, 5);
    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::vector<Edge> edges;
    for (const auto& e : g.edges())
      edges.push_back({perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)], e.w});
    WeightedGraph h(10, std::move(edges));
    QaoaParams a = mis_predict(g, 2, table);
    QaoaParams b = mis_predict(h, 2, table);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(a.gammas[j] == Catch::Approx(b.gammas[j]));
      CHECK(a.betas[j] == Catch::Approx(b.betas[j]));
    }
  }
}

TEST_CASE("predictions are finite for connected graphs with mean degree above 1", "[params]") {
  const auto& tree = small_tree_table();
  const auto& sk = small_sk_table();
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    WeightedGraph g = make_erdos_renyi(12, 0.4, 200 + seed);
    if (g.mean_degree() <= 1.0 || !g.connected()) continue;
    for (int p = 1; p <= 3; ++p) {
      QaoaParams pred = balanced_predict(g, p, tree, sk);
      for (double v : pred.gammas) CHECK(std::isfinite(v));
      for (double v : pred.betas) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("table json round trip", "[params]") {
  PredictionTables t;
  t.tree = small_tree_table();
  t.sk = small_sk_table();
  MisTableBuildOptions mopts;
  mopts.sizes = {8};
  mopts.graphs_total = 8;
  mopts.max_p = 1;
  mopts.restarts = 1;
  mopts.seed = 5;
  t.mis = fit_mis_tables(mopts);

  TreeParamTable tree2 = tree_table_from_json(tree_table_to_json(t.tree));
  CHECK(tree2.rows.size() == t.tree.rows.size());
  for (const auto& [key, row] : t.tree.rows) {
    CHECK(tree2.rows.at(key).gammas == row.gammas);
    CHECK(tree2.rows.at(key).betas == row.betas);
  }
  SkParamTable sk2 = sk_table_from_json(sk_table_to_json(t.sk));
  CHECK(sk2.rows.size() == t.sk.rows.size());
  MisFitTable mis2 = mis_table_from_json(mis_table_to_json(t.mis));
  CHECK(mis2.gamma_coeffs == t.mis.gamma_coeffs);
  CHECK(mis2.beta_rows == t.mis.beta_rows);
}

TEST_CASE("regular-graph angle canonicalization is an exact symmetry", "[params]") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    int d = 2 + static_cast<int>(seed % 4);  // both parities
    WeightedGraph g = make_random_regular(12, d, 300 + seed);
    CostDiagonal diag = maxcut_phase_diagonal(g);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    QaoaParams params({uni(rng), uni(rng)}, {uni(rng), uni(rng)});
    double before = expectation(qaoa_state(diag, params), diag);
    QaoaParams canon = params;
    detail::canonicalize_regular_maxcut_angles(canon, d % 2 != 0);
    double after = expectation(qaoa_state(diag, canon), diag);
    CHECK(after == Catch::Approx(before).margin(1e-9));
    CHECK(canon.gammas[0] >= -1e-12);
    for (double gm : canon.gammas) CHECK(std::fabs(gm) <= kPi / 4.0 + 1e-12);
    for (double b : canon.betas) CHECK(std::fabs(b) <= kPi / 4.0 + 1e-12);
  }
  // sign-weighted complete graphs (spin-glass proxies) share the symmetry
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    WeightedGraph g = with_sign_weights(make_complete_graph(10), 400 + seed);
    CostDiagonal diag = maxcut_phase_diagonal(g);
    QaoaParams params({1.9, -2.3}, {0.9, -1.2});
    double before = expectation(qaoa_state(diag, params), diag);
    QaoaParams canon = params;
    detail::canonicalize_regular_maxcut_angles(canon, true);  // degree 9 is odd
    CHECK(expectation(qaoa_state(diag, canon), diag) == Catch::Approx(before).margin(1e-9));
  }
}
