// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Variational-free QAOA parameter prediction. Max-Cut angles come from a
// degree-weighted lookup into pre-optimized regular-graph tables (dweight),
// a rescaled spin-glass table (skatan), or a blend of the two (balanced);
// MIS angles come from a four-coefficient fit of gamma against the mean
// degree plus a per-degree beta average. The tables are data assets built
// once by optimizing emulated QAOA on proxy instances and shipped as JSON.

#pragma once

#include <array>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "qeopt/emulator.hpp"
#include "qeopt/graph.hpp"
#include "qeopt/io.hpp"

namespace qeopt {

struct DegreeProfile {
  std::map<int, int> histogram;   // degree -> vertex count
  double mean_degree = 0.0;
  std::map<int, double> weights;  // w_d = d*count_d / sum_d d*count_d

  static DegreeProfile of(const WeightedGraph& g) {
    DegreeProfile prof;
    if (g.n() == 0) throw std::invalid_argument("degree profile: empty graph");
    for (int d : g.degrees()) prof.histogram[d]++;
    prof.mean_degree = g.mean_degree();
    double total = 0.0;
    for (auto [d, cnt] : prof.histogram) total += static_cast<double>(d) * cnt;
    if (total <= 0.0) throw std::invalid_argument("degree profile: graph has no edges");
    for (auto [d, cnt] : prof.histogram)
      if (d > 0) prof.weights[d] = static_cast<double>(d) * cnt / total;
    return prof;
  }
};

struct ParamRow {
  std::vector<double> gammas;
  std::vector<double> betas;
};

namespace detail {

inline void canonicalize_maxcut_angles(QaoaParams& params) {
  for (auto& b : params.betas) {
    b = std::fmod(b, kPi / 2.0);
    if (b > kPi / 4.0) b -= kPi / 2.0;
    if (b <= -kPi / 4.0) b += kPi / 2.0;
  }
  if (!params.gammas.empty() && params.gammas[0] < 0.0) {
    for (auto& v : params.gammas) v = -v;
    for (auto& v : params.betas) v = -v;
  }
}

/// Branch canonicalization for unit- or sign-weight REGULAR graphs, where
/// additionally exp(i (pi/2) H) equals a global phase times Z on every
/// vertex of odd degree: shifting gamma_k by pi/2 is exact, combined with
/// flipping beta_j for j >= k when the degree is odd (Z conjugation negates
/// the mixer angle) and with nothing at all when it is even. Gammas land in
/// (-pi/4, pi/4], betas in (-pi/4, pi/4], and the leading gamma is
/// nonnegative.
inline void canonicalize_regular_maxcut_angles(QaoaParams& params, bool odd_degree) {
  bool flip = false;
  for (int k = 0; k < params.p; ++k) {
    double& g = params.gammas[static_cast<std::size_t>(k)];
    long long steps = static_cast<long long>(std::floor(g / (kPi / 2.0) + 0.5));
    g -= static_cast<double>(steps) * (kPi / 2.0);
    if (g > kPi / 4.0) {  // boundary guard from rounding
      g -= kPi / 2.0;
      steps += 1;
    }
    if (g <= -kPi / 4.0) {
      g += kPi / 2.0;
      steps -= 1;
    }
    if (odd_degree && (steps % 2 != 0)) flip = !flip;
    if (flip) params.betas[static_cast<std::size_t>(k)] = -params.betas[static_cast<std::size_t>(k)];
  }
  canonicalize_maxcut_angles(params);
}

inline ParamRow affine_combine(double a, const ParamRow& x, double b, const ParamRow& y) {
  ParamRow r;
  r.gammas.resize(x.gammas.size());
  r.betas.resize(x.betas.size());
  for (std::size_t i = 0; i < x.gammas.size(); ++i) r.gammas[i] = a * x.gammas[i] + b * y.gammas[i];
  for (std::size_t i = 0; i < x.betas.size(); ++i) r.betas[i] = a * x.betas[i] + b * y.betas[i];
  return r;
}

}  // namespace detail

/// Angles pre-optimized on d-regular proxy instances, indexed by (d, p).
/// Unseen degrees are filled by evaluating the observed scaling relations
///   gamma_1 ~ atan(1/sqrt(d-1)),  gamma_j ~ 1/sqrt(d-1) (j >= 2),
///   beta_j ~ asymptote + const/d
/// fitted over the table rows, clamped to the bracketing rows.
struct TreeParamTable {
  std::map<std::pair<int, int>, ParamRow> rows;      // (d, p) -> angles
  std::map<int, std::vector<double>> beta_asymptote;  // p -> large-d beta estimate
  nlohmann::json metadata;

  bool has(int d, int p) const { return rows.count({d, p}) > 0; }

  int max_p() const {
    int m = 0;
    for (const auto& [key, row] : rows) m = std::max(m, key.second);
    return m;
  }

  std::vector<int> degrees_for(int p) const {
    std::vector<int> ds;
    for (const auto& [key, row] : rows)
      if (key.second == p) ds.push_back(key.first);
    std::sort(ds.begin(), ds.end());
    return ds;
  }

  /// Table row for (d, p), interpolated via the scaling relations when the
  /// degree is not tabulated.
  ParamRow row_for(int d, int p) const {
    auto it = rows.find({d, p});
    if (it != rows.end()) return it->second;
    auto ds = degrees_for(p);
    if (ds.empty()) throw std::out_of_range("tree table: no rows for p=" + std::to_string(p));

    // bracketing rows used to clamp each coordinate of the fit
    int lo_d = ds.front(), hi_d = ds.back();
    for (int dd : ds) {
      if (dd <= d) lo_d = dd;
      if (dd >= d) { hi_d = dd; break; }
    }
    if (d > ds.back() && ds.size() >= 2) lo_d = ds[ds.size() - 2];
    const ParamRow& lo_row = rows.at({lo_d, p});
    const ParamRow& hi_row = rows.at({hi_d, p});

    // regressors per coordinate, fitted on rows with d >= 2
    std::vector<int> fit_ds;
    for (int dd : ds)
      if (dd >= 2) fit_ds.push_back(dd);
    if (fit_ds.size() < 2) return lo_row;

    auto eval_fit = [&](auto regressor, auto value_of) {
      std::vector<double> xs, ys;
      for (int dd : fit_ds) {
        xs.push_back(regressor(dd));
        ys.push_back(value_of(rows.at({dd, p})));
      }
      auto [a, b] = fit_affine(xs, ys);
      return a * regressor(d) + b;
    };

    ParamRow out;
    int p_len = static_cast<int>(lo_row.gammas.size());
    out.gammas.resize(static_cast<std::size_t>(p_len));
    out.betas.resize(static_cast<std::size_t>(p_len));
    for (int j = 0; j < p_len; ++j) {
      std::size_t sj = static_cast<std::size_t>(j);
      auto gamma_reg = [&](int dd) {
        return j == 0 ? std::atan(1.0 / std::sqrt(dd - 1.0)) : 1.0 / std::sqrt(dd - 1.0);
      };
      auto beta_reg = [](int dd) { return 1.0 / dd; };
      double gv = eval_fit(gamma_reg, [&](const ParamRow& r) { return r.gammas[sj]; });
      double bv = eval_fit(beta_reg, [&](const ParamRow& r) { return r.betas[sj]; });
      out.gammas[sj] = std::clamp(gv, std::min(lo_row.gammas[sj], hi_row.gammas[sj]),
                                  std::max(lo_row.gammas[sj], hi_row.gammas[sj]));
      out.betas[sj] = std::clamp(bv, std::min(lo_row.betas[sj], hi_row.betas[sj]),
                                 std::max(lo_row.betas[sj], hi_row.betas[sj]));
    }
    return out;
  }
};

/// Sherrington-Kirkpatrick reference angles per layer count.
struct SkParamTable {
  std::map<int, ParamRow> rows;  // p -> angles
  nlohmann::json metadata;
};

/// MIS prediction data: per (p, layer j) the coefficients of
///   gamma_j = c1 + c2 / (<d>^c3 + c4)
/// and per (rounded degree, p) the average optimized beta schedule.
struct MisFitTable {
  static constexpr int kDegreeCap = 12;
  std::map<std::pair<int, int>, std::array<double, 4>> gamma_coeffs;  // (p, j)
  std::map<std::pair<int, int>, double> gamma_residuals;              // (p, j) -> rms residual
  std::map<std::pair<int, int>, std::vector<double>> beta_rows;       // (d, p)
  nlohmann::json metadata;

  int max_p() const {
    int m = 0;
    for (const auto& [key, c] : gamma_coeffs) m = std::max(m, key.first);
    return m;
  }
};

// --- predictors -------------------------------------------------------------

/// Degree-distribution weighted average of the regular-graph table rows.
inline QaoaParams dweight_predict(const WeightedGraph& g, int p, const TreeParamTable& table) {
  if (p < 1 || p > table.max_p())
    throw std::invalid_argument("dweight: p outside table coverage");
  auto prof = DegreeProfile::of(g);
  ParamRow acc;
  acc.gammas.assign(static_cast<std::size_t>(p), 0.0);
  acc.betas.assign(static_cast<std::size_t>(p), 0.0);
  for (auto [d, wd] : prof.weights) {
    ParamRow row = table.row_for(d, p);
    acc = detail::affine_combine(1.0, acc, wd, row);
  }
  return QaoaParams(acc.gammas, acc.betas);
}

/// SK angles with gamma rescaled by atan(1/sqrt(<d>-1)); beta passes through.
inline QaoaParams skatan_predict(const WeightedGraph& g, int p, const SkParamTable& table) {
  double mean_d = g.mean_degree();
  if (!(mean_d > 1.0)) throw std::invalid_argument("skatan: mean degree must exceed 1");
  auto it = table.rows.find(p);
  if (it == table.rows.end()) throw std::invalid_argument("skatan: p outside table coverage");
  double scale = std::atan(1.0 / std::sqrt(mean_d - 1.0));
  std::vector<double> g_out = it->second.gammas, b_out = it->second.betas;
  for (auto& v : g_out) v *= scale;
  return QaoaParams(std::move(g_out), std::move(b_out));
}

/// alpha * SKatan + (1 - alpha) * Dweight, coordinatewise.
inline QaoaParams balanced_predict(const WeightedGraph& g, int p, const TreeParamTable& tree,
                                   const SkParamTable& sk, double alpha = 0.5) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("balanced: alpha must be in [0,1]");
  QaoaParams dw = dweight_predict(g, p, tree);
  QaoaParams sa = skatan_predict(g, p, sk);
  std::vector<double> gam(static_cast<std::size_t>(p)), bet(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) {
    std::size_t sk_idx = static_cast<std::size_t>(k);
    gam[sk_idx] = alpha * sa.gammas[sk_idx] + (1.0 - alpha) * dw.gammas[sk_idx];
    bet[sk_idx] = alpha * sa.betas[sk_idx] + (1.0 - alpha) * dw.betas[sk_idx];
  }
  return QaoaParams(std::move(gam), std::move(bet));
}

/// Divides gamma by the root-mean-square edge weight; beta is unchanged.
/// Applied when a prediction made for unit weights is used on a weighted
/// instance.
inline QaoaParams rescale_for_weights(const QaoaParams& params, const WeightedGraph& g) {
  if (g.edge_count() < 1) throw std::invalid_argument("rescale_for_weights: graph has no edges");
  double ss = 0.0;
  for (const auto& e : g.edges()) ss += e.w * e.w;
  double rms = std::sqrt(ss / g.edge_count());
  if (!(rms > 0.0)) throw std::invalid_argument("rescale_for_weights: zero-weight edge set");
  QaoaParams out = params;
  for (auto& v : out.gammas) v /= rms;
  return out;
}

/// MIS prediction: gamma_j from the fitted curve at the graph's mean degree,
/// beta from the table at round(<d>) clamped to [1, 12].
inline QaoaParams mis_predict(const WeightedGraph& g, int p, const MisFitTable& table) {
  if (p < 1 || p > table.max_p()) throw std::invalid_argument("mis_predict: p outside table coverage");
  double mean_d = g.mean_degree();
  std::vector<double> gam(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    const auto& c = table.gamma_coeffs.at({p, j});
    gam[static_cast<std::size_t>(j)] = c[0] + c[1] / (std::pow(mean_d, c[2]) + c[3]);
  }
  int d = static_cast<int>(std::lround(mean_d));
  d = std::clamp(d, 1, MisFitTable::kDegreeCap);
  auto it = table.beta_rows.find({d, p});
  if (it == table.beta_rows.end()) throw std::runtime_error("mis_predict: missing beta row");
  return QaoaParams(std::move(gam), it->second);
}

// --- table builders -----------------------------------------------------

struct TreeTableBuildOptions {
  std::vector<int> degrees = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20};
  int max_p = 6;
  int proxy_n = 16;           // proxy instance size for tabulated degrees
  int girth_candidates = 12;  // regular-graph draws; the girthiest one wins
  int restarts = 3;
  std::uint64_t seed = 1;
};

/// Proxy instance for degree d: the single edge for d = 1, the complete
/// graph when d >= proxy_n (the only regular graph that small), otherwise
/// the girthiest of a few d-regular draws so the local structure is as
/// tree-like as an emulable instance allows. The draws come from a fixed
/// internal stream, so the proxy for a given (d, n) is canonical and table
/// rebuilds reproduce the same cells.
inline WeightedGraph tree_proxy_graph(int d, int proxy_n, int candidates, int* girth_out = nullptr) {
  if (d == 1) {
    if (girth_out) *girth_out = 0;
    return make_complete_graph(2);
  }
  if (d >= proxy_n - 1) {
    if (girth_out) *girth_out = 3;
    return make_complete_graph(d + 1);
  }
  WeightedGraph best;
  int best_girth = -1;
  for (int c = 0; c < candidates; ++c) {
    int n = proxy_n;
    if ((static_cast<long long>(n) * d) % 2 != 0) n += 1;
    WeightedGraph g = make_random_regular(
        n, d, derive_seed(0x7ee7ab1eULL, static_cast<std::uint64_t>(d) * 1000 + static_cast<std::uint64_t>(c)));
    int girth = g.girth();
    if (girth == 0) girth = n + 1;  // forest: effectively infinite girth
    if (girth > best_girth) {
      best_girth = girth;
      best = g;
    }
  }
  if (girth_out) *girth_out = best_girth;
  return best;
}

namespace detail {

/// First-layer starting points near the known regular-graph optimum
/// magnitude |gamma| = atan(1/sqrt(d-1)), |beta| = pi/8, all sign combos.
inline std::vector<QaoaParams> regular_graph_seed_points(int d) {
  double gm = d >= 2 ? std::atan(1.0 / std::sqrt(d - 1.0)) : kPi / 4.0;
  std::vector<QaoaParams> out;
  for (double sg : {1.0, -1.0})
    for (double sb : {1.0, -1.0}) out.push_back(QaoaParams({sg * gm}, {sb * kPi / 8.0}));
  return out;
}

}  // namespace detail

inline TreeParamTable build_tree_table(const TreeTableBuildOptions& opts = {}) {
  TreeParamTable table;
  nlohmann::json cells = nlohmann::json::array();
  // Degrees whose only emulable regular proxy would be (nearly) complete are
  // not locally tree-like at all; those rows come from the scaling-relation
  // extrapolation over the directly optimized cells instead.
  std::vector<int> direct;
  for (int d : opts.degrees)
    if (d == 1 || d < opts.proxy_n - 1) direct.push_back(d);

  for (std::size_t di = 0; di < direct.size(); ++di) {
    int d = direct[di];
    int girth = 0;
    WeightedGraph proxy = tree_proxy_graph(d, opts.proxy_n, opts.girth_candidates, &girth);
    CostDiagonal diag = maxcut_phase_diagonal(proxy);
    OptimizeOptions oopts;
    oopts.deterministic_inits_only = true;
    auto seeds_for = [&](int layers) {
      return layers == 1 ? detail::regular_graph_seed_points(d) : std::vector<QaoaParams>{};
    };
    auto levels = optimize_levels(
        diag, opts.max_p, [&](int) { return opts.restarts; }, derive_seed(opts.seed, 1000 + di), oopts,
        seeds_for);
    for (int p = 1; p <= opts.max_p; ++p) {
      auto lvl = levels[static_cast<std::size_t>(p - 1)];
      detail::canonicalize_regular_maxcut_angles(lvl.params, d % 2 != 0);
      bool failed = !std::isfinite(lvl.energy);
      if (!failed) {
        table.rows[{d, p}] = {lvl.params.gammas, lvl.params.betas};
      }
      nlohmann::json cell;
      cell["d"] = d;
      cell["p"] = p;
      cell["proxy_n"] = proxy.n();
      cell["proxy_girth"] = girth;
      cell["energy"] = lvl.energy;
      cell["ar_star"] = ar_star(lvl.energy, diag);
      cell["converged"] = lvl.converged;
      cell["fallback"] = failed;
      cells.push_back(cell);
    }
  }
  // extrapolated rows plus any failed cell, via the scaling relations over
  // the cells that did build
  for (int d : opts.degrees)
    for (int p = 1; p <= opts.max_p; ++p)
      if (!table.has(d, p)) {
        table.rows[{d, p}] = table.row_for(d, p);
        cells.push_back({{"d", d}, {"p", p}, {"fallback", true}, {"source", "scaling extrapolation"}});
      }
  int top_d = *std::max_element(opts.degrees.begin(), opts.degrees.end());
  for (int p = 1; p <= opts.max_p; ++p)
    table.beta_asymptote[p] = table.rows.at({top_d, p}).betas;
  table.metadata["schema_version"] = 1;
  table.metadata["kind"] = "tree";
  table.metadata["build_seed"] = opts.seed;
  table.metadata["proxy"] =
      "max-girth random d-regular graphs, n=" + std::to_string(opts.proxy_n) +
      "; unit-weight ZZ cost convention; degrees with only near-complete proxies extrapolated";
  table.metadata["asymptote_degree"] = top_d;
  table.metadata["cells"] = cells;
  return table;
}

struct SkTableBuildOptions {
  int n = 14;
  int instances = 10;
  int max_p = 6;
  int restarts = 3;
  std::uint64_t seed = 2;
};

/// SK reference angles built by optimizing random-sign complete graphs and
/// inverting the skatan rescaling at the proxy's own mean degree, so that
/// skatan_predict applied back to an SK instance reproduces the optimum.
inline SkParamTable build_sk_table(const SkTableBuildOptions& opts = {}) {
  SkParamTable table;
  double mean_d = static_cast<double>(opts.n - 1);
  double scale = std::atan(1.0 / std::sqrt(mean_d - 1.0));
  std::map<int, std::vector<ParamRow>> per_p;
  nlohmann::json runs = nlohmann::json::array();
  for (int inst = 0; inst < opts.instances; ++inst) {
    WeightedGraph g = with_sign_weights(make_complete_graph(opts.n),
                                        derive_seed(opts.seed, static_cast<std::uint64_t>(inst)));
    CostDiagonal diag = maxcut_phase_diagonal(g);
    OptimizeOptions oopts;
    oopts.deterministic_inits_only = true;
    auto seeds_for = [&](int layers) {
      return layers == 1 ? detail::regular_graph_seed_points(opts.n - 1) : std::vector<QaoaParams>{};
    };
    auto levels = optimize_levels(
        diag, opts.max_p, [&](int) { return opts.restarts; },
        derive_seed(opts.seed, 500 + static_cast<std::uint64_t>(inst)), oopts, seeds_for);
    for (int p = 1; p <= opts.max_p; ++p) {
      auto lvl = levels[static_cast<std::size_t>(p - 1)];
      detail::canonicalize_regular_maxcut_angles(lvl.params, (opts.n - 1) % 2 != 0);
      ParamRow row{lvl.params.gammas, lvl.params.betas};
      for (auto& v : row.gammas) v /= scale;
      per_p[p].push_back(row);
      runs.push_back({{"instance", inst}, {"p", p}, {"energy", lvl.energy}});
    }
  }
  for (auto& [p, rows] : per_p) {
    ParamRow mean;
    mean.gammas.assign(static_cast<std::size_t>(p), 0.0);
    mean.betas.assign(static_cast<std::size_t>(p), 0.0);
    for (const auto& r : rows) mean = detail::affine_combine(1.0, mean, 1.0 / rows.size(), r);
    table.rows[p] = mean;
  }
  table.metadata["schema_version"] = 1;
  table.metadata["kind"] = "sk";
  table.metadata["build_seed"] = opts.seed;
  table.metadata["proxy"] = "random-sign complete graphs K_" + std::to_string(opts.n) +
                            ", gamma divided by atan(1/sqrt(n-2)) to undo the skatan rescaling";
  table.metadata["runs"] = runs;
  return table;
}

struct MisFitResult {
  std::array<double, 4> coeffs{};
  double rms_residual = 0.0;
  bool converged = false;
};

/// Least-squares fit of gamma ~ c1 + c2/(d^c3 + c4) with c3 > 0, via
/// Levenberg-Marquardt over several starting points (c3 parameterized as
/// exp(t) to keep it positive).
inline MisFitResult fit_mis_gamma_curve(const std::vector<double>& mean_degrees,
                                        const std::vector<double>& gammas) {
  if (mean_degrees.size() != gammas.size() || mean_degrees.size() < 4)
    throw std::invalid_argument("mis gamma fit: need at least 4 points");
  auto residuals = [&](const std::vector<double>& p) {
    std::vector<double> r(mean_degrees.size());
    double c3 = std::exp(p[2]);
    for (std::size_t i = 0; i < mean_degrees.size(); ++i) {
      double denom = std::pow(mean_degrees[i], c3) + p[3];
      r[i] = (std::fabs(denom) < 1e-9) ? 1e6 : p[0] + p[1] / denom - gammas[i];
    }
    return r;
  };
  double y_mean = 0.0;
  for (double y : gammas) y_mean += y;
  y_mean /= static_cast<double>(gammas.size());
  double y_spread = 0.0;
  for (double y : gammas) y_spread = std::max(y_spread, std::fabs(y - y_mean));
  if (y_spread == 0.0) y_spread = 1.0;

  MisFitResult best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (double c3 : {0.5, 1.0, 2.0})
    for (double c4 : {0.1, 1.0, 5.0})
      for (double c2 : {y_spread, -y_spread, 4.0 * y_spread, -4.0 * y_spread}) {
        LmOptions lopts;
        lopts.tol = 1e-15;
        lopts.max_iters = 500;
        auto r = lm_fit(residuals, {y_mean, c2, std::log(c3), c4}, lopts);
        if (r.sse < best_sse) {
          best_sse = r.sse;
          best.coeffs = {r.params[0], r.params[1], std::exp(r.params[2]), r.params[3]};
          best.rms_residual = std::sqrt(r.sse / static_cast<double>(gammas.size()));
          best.converged = r.converged;
        }
      }
  return best;
}

struct MisTableBuildOptions {
  std::vector<int> sizes = {10, 11, 12, 13, 14};
  int graphs_total = 105;
  double p_edge_min = 0.2;
  double p_edge_max = 0.7;
  double lambda = 1.0;
  int max_p = 6;
  int restarts = 2;
  std::uint64_t seed = 3;
};

inline MisFitTable fit_mis_tables(const MisTableBuildOptions& opts = {}) {
  MisFitTable table;
  struct TrainPoint {
    WeightedGraph graph;
    double mean_degree = 0.0;
    int rounded_degree = 0;
    std::map<int, ParamRow> per_p;
  };
  std::vector<TrainPoint> points;
  Rng rng = make_rng(opts.seed);
  std::uniform_real_distribution<double> upe(opts.p_edge_min, opts.p_edge_max);
  std::uint64_t sub_seed = 0;
  while (static_cast<int>(points.size()) < opts.graphs_total) {
    int n = opts.sizes[points.size() % opts.sizes.size()];
    double pe = upe(rng);
    WeightedGraph g = make_erdos_renyi(n, pe, derive_seed(opts.seed, 10 + sub_seed));
    ++sub_seed;
    if (g.edge_count() == 0 || !g.connected()) continue;
    TrainPoint tp;
    tp.mean_degree = g.mean_degree();
    tp.rounded_degree =
        std::clamp(static_cast<int>(std::lround(tp.mean_degree)), 1, MisFitTable::kDegreeCap);
    tp.graph = std::move(g);
    points.push_back(std::move(tp));
  }

  // Optimize in mean-degree order, seeding each graph with its predecessor's
  // optimum. Nearby degrees have nearby optima, so this keeps the whole
  // training set on one branch of the (many-valleyed) angle landscape and
  // the gamma-versus-degree relationship clean enough to fit.
  std::stable_sort(points.begin(), points.end(),
                   [](const TrainPoint& a, const TrainPoint& b) { return a.mean_degree < b.mean_degree; });
  std::map<int, QaoaParams> previous;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& tp = points[i];
    CostDiagonal diag = mis_phase_diagonal(tp.graph, opts.lambda);
    auto chain_init = [&](int layers) {
      std::vector<QaoaParams> extra;
      auto it = previous.find(layers);
      if (it != previous.end()) extra.push_back(it->second);
      return extra;
    };
    OptimizeOptions oopts;
    oopts.deterministic_inits_only = true;
    auto levels = optimize_levels(
        diag, opts.max_p, [&](int) { return opts.restarts; },
        derive_seed(opts.seed, 9000 + i), oopts, chain_init);
    for (int p = 1; p <= opts.max_p; ++p) {
      const auto& lvl = levels[static_cast<std::size_t>(p - 1)];
      tp.per_p[p] = {lvl.params.gammas, lvl.params.betas};
      previous[p] = lvl.params;
    }
  }

  nlohmann::json fit_meta = nlohmann::json::array();
  for (int p = 1; p <= opts.max_p; ++p) {
    for (int j = 0; j < p; ++j) {
      std::vector<double> xs, ys;
      for (const auto& tp : points) {
        xs.push_back(tp.mean_degree);
        ys.push_back(tp.per_p.at(p).gammas[static_cast<std::size_t>(j)]);
      }
      MisFitResult fit = fit_mis_gamma_curve(xs, ys);
      bool fallback = !std::isfinite(fit.coeffs[0]) || !std::isfinite(fit.rms_residual);
      if (fallback && j > 0 && table.gamma_coeffs.count({p, j - 1})) {
        fit.coeffs = table.gamma_coeffs.at({p, j - 1});  // nearest fitted layer
        fit.rms_residual = table.gamma_residuals.at({p, j - 1});
      }
      table.gamma_coeffs[{p, j}] = fit.coeffs;
      table.gamma_residuals[{p, j}] = fit.rms_residual;
      fit_meta.push_back({{"p", p},
                          {"j", j},
                          {"rms_residual", fit.rms_residual},
                          {"converged", fit.converged},
                          {"fallback", fallback}});
    }
    // per-degree beta averages
    std::map<int, std::vector<ParamRow>> by_degree;
    for (const auto& tp : points) by_degree[tp.rounded_degree].push_back(tp.per_p.at(p));
    std::map<int, std::vector<double>> averaged;
    for (auto& [d, rows] : by_degree) {
      std::vector<double> mean(static_cast<std::size_t>(p), 0.0);
      for (const auto& r : rows)
        for (int j = 0; j < p; ++j) mean[static_cast<std::size_t>(j)] += r.betas[static_cast<std::size_t>(j)];
      for (auto& v : mean) v /= static_cast<double>(rows.size());
      averaged[d] = mean;
    }
    for (int d = 1; d <= MisFitTable::kDegreeCap; ++d) {
      if (averaged.count(d)) {
        table.beta_rows[{d, p}] = averaged.at(d);
        continue;
      }
      int nearest = -1;
      for (auto& [dd, row] : averaged)
        if (nearest < 0 || std::abs(dd - d) < std::abs(nearest - d)) nearest = dd;
      table.beta_rows[{d, p}] = averaged.at(nearest);
    }
  }
  table.metadata["schema_version"] = 1;
  table.metadata["kind"] = "mis_fit";
  table.metadata["build_seed"] = opts.seed;
  table.metadata["training"] = {{"graphs", opts.graphs_total},
                                {"sizes", opts.sizes},
                                {"edge_probability", {opts.p_edge_min, opts.p_edge_max}},
                                {"lambda", opts.lambda}};
  table.metadata["fits"] = fit_meta;
  return table;
}

// --- JSON persistence -------------------------------------------------------

inline nlohmann::json tree_table_to_json(const TreeParamTable& t) {
  nlohmann::json j;
  j["metadata"] = t.metadata;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, row] : t.rows)
    rows.push_back({{"d", key.first}, {"p", key.second}, {"gammas", row.gammas}, {"betas", row.betas}});
  j["rows"] = rows;
  nlohmann::json asym = nlohmann::json::array();
  for (const auto& [p, betas] : t.beta_asymptote) asym.push_back({{"p", p}, {"betas", betas}});
  j["beta_asymptote"] = asym;
  return j;
}

inline TreeParamTable tree_table_from_json(const nlohmann::json& j) {
  TreeParamTable t;
  t.metadata = j.value("metadata", nlohmann::json::object());
  for (const auto& row : j.at("rows"))
    t.rows[{row.at("d").get<int>(), row.at("p").get<int>()}] = {
        row.at("gammas").get<std::vector<double>>(), row.at("betas").get<std::vector<double>>()};
  for (const auto& a : j.at("beta_asymptote"))
    t.beta_asymptote[a.at("p").get<int>()] = a.at("betas").get<std::vector<double>>();
  return t;
}

inline nlohmann::json sk_table_to_json(const SkParamTable& t) {
  nlohmann::json j;
  j["metadata"] = t.metadata;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [p, row] : t.rows)
    rows.push_back({{"p", p}, {"gammas", row.gammas}, {"betas", row.betas}});
  j["rows"] = rows;
  return j;
}

inline SkParamTable sk_table_from_json(const nlohmann::json& j) {
  SkParamTable t;
  t.metadata = j.value("metadata", nlohmann::json::object());
  for (const auto& row : j.at("rows"))
    t.rows[row.at("p").get<int>()] = {row.at("gammas").get<std::vector<double>>(),
                                      row.at("betas").get<std::vector<double>>()};
  return t;
}

inline nlohmann::json mis_table_to_json(const MisFitTable& t) {
  nlohmann::json j;
  j["metadata"] = t.metadata;
  nlohmann::json gam = nlohmann::json::array();
  for (const auto& [key, c] : t.gamma_coeffs)
    gam.push_back({{"p", key.first},
                   {"j", key.second},
                   {"c", std::vector<double>(c.begin(), c.end())},
                   {"rms_residual", t.gamma_residuals.at(key)}});
  j["gamma"] = gam;
  nlohmann::json bet = nlohmann::json::array();
  for (const auto& [key, row] : t.beta_rows)
    bet.push_back({{"d", key.first}, {"p", key.second}, {"betas", row}});
  j["beta"] = bet;
  return j;
}

inline MisFitTable mis_table_from_json(const nlohmann::json& j) {
  MisFitTable t;
  t.metadata = j.value("metadata", nlohmann::json::object());
  for (const auto& g : j.at("gamma")) {
    auto c = g.at("c").get<std::vector<double>>();
    if (c.size() != 4) throw std::runtime_error("mis table: gamma fit needs 4 coefficients");
    t.gamma_coeffs[{g.at("p").get<int>(), g.at("j").get<int>()}] = {c[0], c[1], c[2], c[3]};
    t.gamma_residuals[{g.at("p").get<int>(), g.at("j").get<int>()}] =
        g.value("rms_residual", 0.0);
  }
  for (const auto& b : j.at("beta"))
    t.beta_rows[{b.at("d").get<int>(), b.at("p").get<int>()}] =
        b.at("betas").get<std::vector<double>>();
  return t;
}

/// Asset directory: QEOPT_ASSETS environment variable, else "assets".
inline std::string asset_directory() {
  const char* env = std::getenv("QEOPT_ASSETS");
  return env && *env ? std::string(env) : std::string("assets");
}

struct PredictionTables {
  TreeParamTable tree;
  SkParamTable sk;
  MisFitTable mis;
};

inline PredictionTables load_prediction_tables(const std::string& dir = asset_directory()) {
  PredictionTables t;
  t.tree = tree_table_from_json(nlohmann::json::parse(slurp_file(dir + "/tree_table.json")));
  t.sk = sk_table_from_json(nlohmann::json::parse(slurp_file(dir + "/sk_table.json")));
  t.mis = mis_table_from_json(nlohmann::json::parse(slurp_file(dir + "/mis_fit.json")));
  return t;
}

inline void save_prediction_tables(const PredictionTables& t, const std::string& dir) {
  spill_file(dir + "/tree_table.json", tree_table_to_json(t.tree).dump(1));
  spill_file(dir + "/sk_table.json", sk_table_to_json(t.sk).dump(1));
  spill_file(dir + "/mis_fit.json", mis_table_to_json(t.mis).dump(1));
}

}  // namespace qeopt
