// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Runtime metrics over search traces: the fraction of restarts that reach a
// certified optimum within T iterations, the expected iteration count
// C(T) = T / F_opt(T), its minimum R_min, the cold/warm Q-factor ratio, and
// approximation-ratio curves.

#pragma once

#include <optional>

#include "qeopt/heuristics.hpp"

namespace qeopt {

inline constexpr double kCostTolerance = 1e-9;

/// F_opt(T) for T = 1..size(): fraction of restarts whose best-so-far cost
/// reached the optimum within T iterations. Nondecreasing by construction.
struct FoptCurve {
  std::vector<double> f;

  double at(long long t) const {
    if (t < 1) throw std::invalid_argument("fopt: T >= 1 required");
    if (f.empty()) return 0.0;
    std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(t) - 1, f.size() - 1);
    return f[idx];
  }
};

namespace bench_detail {

/// First iteration at which a restart's best-so-far reached the optimum,
/// or -1 when it never did.
inline long long hit_iteration(const RestartRecord& r, double optimum_min) {
  for (auto [iter, cost] : r.improvements)
    if (cost <= optimum_min + kCostTolerance) return iter;
  return -1;
}

inline double hit_time(const RestartRecord& r, double optimum_min) {
  for (auto [t, cost] : r.timed_improvements)
    if (cost <= optimum_min + kCostTolerance) return t;
  return -1.0;
}

}  // namespace bench_detail

inline FoptCurve fopt_curve(const RunTrace& trace, double optimum_min, long long t_total = 0) {
  if (trace.restarts.empty()) throw std::invalid_argument("fopt_curve: empty trace");
  if (t_total <= 0) t_total = std::max<long long>(trace.max_iterations(), 1);
  std::vector<long long> hit_counts(static_cast<std::size_t>(t_total) + 1, 0);
  for (const auto& r : trace.restarts) {
    long long hit = bench_detail::hit_iteration(r, optimum_min);
    if (hit < 0) continue;
    hit_counts[static_cast<std::size_t>(std::min(hit, t_total))]++;
  }
  FoptCurve curve;
  curve.f.resize(static_cast<std::size_t>(t_total));
  long long cum = hit_counts[0];  // hits at iteration 0 count for every T >= 1
  for (long long t = 1; t <= t_total; ++t) {
    cum += hit_counts[static_cast<std::size_t>(t)];
    curve.f[static_cast<std::size_t>(t - 1)] =
        static_cast<double>(cum) / static_cast<double>(trace.restarts.size());
  }
  return curve;
}

struct ExpectedRuntime {
  double r_min = std::numeric_limits<double>::infinity();
  long long t_star = 0;
  bool finite = false;
};

/// Minimum of C(T) = T / F_opt(T) over T with F > 0; smallest T wins ties.
inline ExpectedRuntime expected_runtime(const FoptCurve& curve) {
  ExpectedRuntime out;
  for (long long t = 1; t <= static_cast<long long>(curve.f.size()); ++t) {
    double f = curve.f[static_cast<std::size_t>(t - 1)];
    if (f <= 0.0) continue;
    double c = static_cast<double>(t) / f;
    if (!out.finite || c < out.r_min - 1e-15) {
      out.r_min = c;
      out.t_star = t;
      out.finite = true;
    }
  }
  return out;
}

struct QFactorReport {
  std::string instance_id;
  int p = 0;
  std::string filter = "none";
  std::string warm_source = "qaoa";
  std::optional<double> q;  // empty when either runtime is infinite
  ExpectedRuntime cold;
  ExpectedRuntime warm;
  long long restarts_cold = 0;
  long long restarts_warm = 0;
};

inline QFactorReport q_factor(const RunTrace& cold, const RunTrace& warm, double optimum_min,
                              long long t_total = 0) {
  QFactorReport rep;
  rep.restarts_cold = static_cast<long long>(cold.restarts.size());
  rep.restarts_warm = static_cast<long long>(warm.restarts.size());
  rep.cold = expected_runtime(fopt_curve(cold, optimum_min, t_total));
  rep.warm = expected_runtime(fopt_curve(warm, optimum_min, t_total));
  if (rep.cold.finite && rep.warm.finite) rep.q = rep.cold.r_min / rep.warm.r_min;
  return rep;
}

struct TimedExpectedRuntime {
  double r_min_seconds = std::numeric_limits<double>::infinity();
  double t_star = 0.0;
  bool finite = false;
};

/// Same construction over wall time. F(t) jumps only at recorded hit times,
/// and C(t) = t / F(t) grows between jumps, so evaluating at the hit times
/// is exhaustive.
inline TimedExpectedRuntime time_expected_runtime(const RunTrace& trace, double optimum_min) {
  if (trace.restarts.empty()) throw std::invalid_argument("time_expected_runtime: empty trace");
  std::vector<double> hits;
  for (const auto& r : trace.restarts) {
    double t = bench_detail::hit_time(r, optimum_min);
    if (t >= 0.0) hits.push_back(t);
  }
  TimedExpectedRuntime out;
  if (hits.empty()) return out;
  std::sort(hits.begin(), hits.end());
  double total = static_cast<double>(trace.restarts.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    double f = static_cast<double>(i + 1) / total;
    double c = hits[i] / f;
    if (!out.finite || c < out.r_min_seconds) {
      out.r_min_seconds = c;
      out.t_star = hits[i];
      out.finite = true;
    }
  }
  return out;
}

/// AR(T): median across restarts of the best-so-far objective (in the
/// instance's maximization framing) divided by the optimum, for T = 1..T_total.
/// Requires a positive optimum; shift the objective otherwise.
inline std::vector<double> approximation_ratio_curve(const RunTrace& trace, const QuboInstance& q,
                                                     double optimum_reported, long long t_total = 0) {
  if (trace.restarts.empty()) throw std::invalid_argument("ar_curve: empty trace");
  if (!(optimum_reported > 0.0))
    throw std::invalid_argument(
        "ar_curve: optimum must be positive in the maximization framing; shift the objective");
  if (t_total <= 0) t_total = std::max<long long>(trace.max_iterations(), 1);

  std::vector<double> curve(static_cast<std::size_t>(t_total));
  std::vector<std::size_t> cursor(trace.restarts.size(), 0);
  std::vector<double> current(trace.restarts.size(), 0.0);
  for (std::size_t r = 0; r < trace.restarts.size(); ++r)
    current[r] = q.report(trace.restarts[r].improvements.front().second);
  for (long long t = 1; t <= t_total; ++t) {
    std::vector<double> values(trace.restarts.size());
    for (std::size_t r = 0; r < trace.restarts.size(); ++r) {
      const auto& imp = trace.restarts[r].improvements;
      while (cursor[r] + 1 < imp.size() && imp[cursor[r] + 1].first <= t) {
        cursor[r]++;
        current[r] = q.report(imp[cursor[r]].second);
      }
      values[r] = current[r] / optimum_reported;
    }
    curve[static_cast<std::size_t>(t - 1)] = median_of(values);
  }
  return curve;
}

}  // namespace qeopt
