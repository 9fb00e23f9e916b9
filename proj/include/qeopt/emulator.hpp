// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qeopt/optimize.hpp"
#include "qeopt/qubo.hpp"
#include "qeopt/sample_set.hpp"

namespace qeopt {

inline constexpr double kPi = 3.14159265358979323846;

/// QAOA angle schedule: p layers of (gamma_k, beta_k).
struct QaoaParams {
  int p = 1;
  std::vector<double> gammas;
  std::vector<double> betas;

  QaoaParams() = default;
  QaoaParams(std::vector<double> g, std::vector<double> b)
      : p(static_cast<int>(g.size())), gammas(std::move(g)), betas(std::move(b)) {
    if (p < 1 || betas.size() != gammas.size())
      throw std::invalid_argument("qaoa params: need p >= 1 with matching gamma/beta lengths");
  }

  std::vector<double> flat() const {
    std::vector<double> v;
    v.reserve(2 * static_cast<std::size_t>(p));
    v.insert(v.end(), gammas.begin(), gammas.end());
    v.insert(v.end(), betas.begin(), betas.end());
    return v;
  }
  static QaoaParams from_flat(const std::vector<double>& v) {
    if (v.empty() || v.size() % 2 != 0) throw std::invalid_argument("qaoa params: bad flat vector");
    std::size_t p = v.size() / 2;
    return QaoaParams(std::vector<double>(v.begin(), v.begin() + static_cast<long>(p)),
                      std::vector<double>(v.begin() + static_cast<long>(p), v.end()));
  }
};

struct Statevector {
  int n = 0;
  std::vector<std::complex<double>> amps;

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
  }
};

inline Statevector uniform_state(int n) {
  Statevector s;
  s.n = n;
  std::size_t size = 1ULL << n;
  s.amps.assign(size, std::complex<double>(1.0 / std::sqrt(static_cast<double>(size)), 0.0));
  return s;
}

/// Phase layer exp(i gamma H_C): elementwise multiplication by
/// exp(i gamma * values[k]).
inline void apply_phase_layer(Statevector& s, const CostDiagonal& diag, double gamma) {
  if (s.n != diag.n) throw std::invalid_argument("phase layer: dimension mismatch");
  for (std::size_t k = 0; k < s.amps.size(); ++k)
    s.amps[k] *= std::complex<double>(std::cos(gamma * diag.values[k]), std::sin(gamma * diag.values[k]));
}

/// Mixer layer exp(i beta sum_j X_j), applied as n single-qubit rotations
///   exp(i beta X) = [[cos b, i sin b], [i sin b, cos b]]
/// with stride-2^j sweeps; no 2^n x 2^n matrices are formed.
inline void apply_mixer_layer(Statevector& s, double beta) {
  const double c = std::cos(beta);
  const std::complex<double> is(0.0, std::sin(beta));
  const std::size_t size = s.amps.size();
  for (int j = 0; j < s.n; ++j) {
    const std::size_t bit = 1ULL << j;
    for (std::size_t base = 0; base < size; base += 2 * bit) {
      for (std::size_t off = 0; off < bit; ++off) {
        auto& a0 = s.amps[base + off];
        auto& a1 = s.amps[base + off + bit];
        const std::complex<double> t0 = c * a0 + is * a1;
        const std::complex<double> t1 = is * a0 + c * a1;
        a0 = t0;
        a1 = t1;
      }
    }
  }
}

/// Prepares the p-layer QAOA state
///   prod_{k=p..1} exp(i beta_k H_B) exp(i gamma_k H_C) |+>^n
/// (layer k = 1 acts first) for the cost diagonal `diag`.
inline Statevector qaoa_state(const CostDiagonal& diag, const QaoaParams& params,
                              int cap = kDefaultEmulationCap) {
  check_emulation_cap(diag.n, cap);
  Statevector s = uniform_state(diag.n);
  for (int k = 0; k < params.p; ++k) {
    apply_phase_layer(s, diag, params.gammas[static_cast<std::size_t>(k)]);
    apply_mixer_layer(s, params.betas[static_cast<std::size_t>(k)]);
  }
  return s;
}

/// <psi| H_C |psi> for a diagonal cost.
inline double expectation(const Statevector& s, const CostDiagonal& diag) {
  if (s.n != diag.n) throw std::invalid_argument("expectation: dimension mismatch");
  double e = 0.0;
  for (std::size_t k = 0; k < s.amps.size(); ++k) e += std::norm(s.amps[k]) * diag.values[k];
  return e;
}

/// Rescaled approximation ratio: 1 at the ground state of the diagonal,
/// 0 at the maximally excited state. A constant objective scores 1.
inline double ar_star(double energy, const CostDiagonal& diag) {
  double span = diag.max_value - diag.min_value;
  if (span <= 0.0) return 1.0;
  return 1.0 - (energy - diag.min_value) / span;
}

/// i.i.d. computational-basis measurements; deterministic under seed.
/// Sorted-uniform sweep: O(2^n + shots log shots) and no cumulative table.
inline SampleSet sample(const Statevector& s, long long shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample: shots >= 1 required");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(shots));
  for (auto& v : u) v = uni(rng);
  std::sort(u.begin(), u.end());

  SampleSet out;
  out.n = s.n;
  double acc = 0.0;
  std::size_t i = 0;
  for (std::size_t k = 0; k < s.amps.size() && i < u.size(); ++k) {
    acc += std::norm(s.amps[k]);
    long long c = 0;
    while (i < u.size() && u[i] < acc) {
      ++c;
      ++i;
    }
    if (c > 0) out.add(index_to_string(k, s.n), c);
  }
  // numerical slack: assign any leftover draws to the last basis state
  if (i < u.size()) out.add(index_to_string(s.amps.size() - 1, s.n), static_cast<long long>(u.size() - i));
  return out;
}

/// Flips each measured bit independently: 0->1 with probability p,
/// 1->0 with probability q (per qubit). Used to synthesize readout noise.
inline SampleSet inject_readout_noise(const SampleSet& s,
                                      const std::vector<std::pair<double, double>>& pq,
                                      std::uint64_t seed) {
  if (static_cast<int>(pq.size()) != s.n)
    throw std::invalid_argument("inject_readout_noise: need one (p,q) pair per qubit");
  for (auto [p, q] : pq)
    if (p < 0 || p > 1 || q < 0 || q > 1)
      throw std::invalid_argument("inject_readout_noise: probabilities must be in [0,1]");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SampleSet out;
  out.n = s.n;
  for (const auto& [key, count] : s.counts) {
    for (long long c = 0; c < count; ++c) {
      std::string noisy = key;
      for (int j = 0; j < s.n; ++j) {
        double flip = noisy[static_cast<std::size_t>(j)] == '0' ? pq[static_cast<std::size_t>(j)].first
                                                                : pq[static_cast<std::size_t>(j)].second;
        if (flip > 0.0 && uni(rng) < flip)
          noisy[static_cast<std::size_t>(j)] = noisy[static_cast<std::size_t>(j)] == '0' ? '1' : '0';
      }
      out.add(noisy, 1);
    }
  }
  return out;
}

// --- energy gradient --------------------------------------------------------

/// Applies H_B = sum_j X_j to a state (dense, O(n 2^n)).
inline std::vector<std::complex<double>> apply_mixer_hamiltonian(const Statevector& s) {
  std::vector<std::complex<double>> out(s.amps.size(), {0.0, 0.0});
  for (int j = 0; j < s.n; ++j) {
    const std::size_t bit = 1ULL << j;
    for (std::size_t k = 0; k < s.amps.size(); ++k) out[k] += s.amps[k ^ bit];
  }
  return out;
}

/// Energy and its exact gradient with respect to all angles via a reverse
/// (adjoint) sweep; costs about three state evolutions.
inline std::pair<double, std::vector<double>> qaoa_energy_and_gradient(const CostDiagonal& diag,
                                                                       const QaoaParams& params) {
  Statevector psi = qaoa_state(diag, params);
  double energy = expectation(psi, diag);

  Statevector lam;
  lam.n = psi.n;
  lam.amps.resize(psi.amps.size());
  for (std::size_t k = 0; k < psi.amps.size(); ++k) lam.amps[k] = diag.values[k] * psi.amps[k];

  std::vector<double> dgamma(static_cast<std::size_t>(params.p), 0.0);
  std::vector<double> dbeta(static_cast<std::size_t>(params.p), 0.0);

  for (int k = params.p - 1; k >= 0; --k) {
    // d/d beta_k: 2 Re <lam | i H_B | psi_k> with psi_k the state after layer k
    {
      auto hb = apply_mixer_hamiltonian(psi);
      std::complex<double> inner(0.0, 0.0);
      for (std::size_t t = 0; t < hb.size(); ++t) inner += std::conj(lam.amps[t]) * hb[t];
      dbeta[static_cast<std::size_t>(k)] = -2.0 * inner.imag();
    }
    // undo the mixer on both vectors
    apply_mixer_layer(psi, -params.betas[static_cast<std::size_t>(k)]);
    apply_mixer_layer(lam, -params.betas[static_cast<std::size_t>(k)]);
    // d/d gamma_k: 2 Re <lam | i H_C | psi'> with psi' = C(gamma_k) psi_{k-1}
    {
      std::complex<double> inner(0.0, 0.0);
      for (std::size_t t = 0; t < psi.amps.size(); ++t)
        inner += std::conj(lam.amps[t]) * (diag.values[t] * psi.amps[t]);
      dgamma[static_cast<std::size_t>(k)] = -2.0 * inner.imag();
    }
    apply_phase_layer(psi, diag, -params.gammas[static_cast<std::size_t>(k)]);
    apply_phase_layer(lam, diag, -params.gammas[static_cast<std::size_t>(k)]);
  }
  std::vector<double> grad;
  grad.reserve(2 * static_cast<std::size_t>(params.p));
  grad.insert(grad.end(), dgamma.begin(), dgamma.end());
  grad.insert(grad.end(), dbeta.begin(), dbeta.end());
  // The sign above: <lam|iH|psi> contributes 2*Re(i * <lam|H|psi>) = -2*Im<lam|H|psi>.
  return {energy, grad};
}

// --- local parameter optimization -------------------------------------------

struct OptimizeOptions {
  int restarts = 5;
  bool analytic_gradient = true;  // exact adjoint gradient; central differences otherwise
  int max_iters = 120;
  double gamma_bound = kPi;       // gamma in [-pi, pi]
  double beta_bound = kPi / 2.0;  // beta in [-pi/2, pi/2]
  // Informed initializations only (two ramp scales plus the nesting guess).
  // Table builders use this so regenerated tables land in the same optimum
  // family instead of whichever basin a random draw happens to win.
  bool deterministic_inits_only = false;
};

struct OptimizedParams {
  QaoaParams params;
  double energy = std::numeric_limits<double>::infinity();
  bool converged = false;
};

namespace detail {

inline QaoaParams linear_ramp_init(int p, double gamma_bound, double beta_bound) {
  // gammas ascend, betas descend across layers
  std::vector<double> g(static_cast<std::size_t>(p)), b(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) {
    double frac = (k + 1.0) / (p + 1.0);
    g[static_cast<std::size_t>(k)] = 0.5 * gamma_bound * frac;
    b[static_cast<std::size_t>(k)] = 0.5 * beta_bound * (1.0 - frac);
  }
  return QaoaParams(std::move(g), std::move(b));
}

inline QaoaParams pad_with_zero_layer(const QaoaParams& prev) {
  std::vector<double> g = prev.gammas, b = prev.betas;
  g.push_back(0.0);
  b.push_back(0.0);
  return QaoaParams(std::move(g), std::move(b));
}

inline QaoaParams pad_with_half_layer(const QaoaParams& prev) {
  std::vector<double> g = prev.gammas, b = prev.betas;
  g.push_back(0.5 * g.back());
  b.push_back(0.5 * b.back());
  return QaoaParams(std::move(g), std::move(b));
}

/// Stretches a (p-1)-layer schedule onto p layers by linear interpolation,
/// the usual way of extending a good shallow schedule one layer deeper.
inline QaoaParams interp_extend(const QaoaParams& prev) {
  int p = prev.p + 1;
  auto stretch = [&](const std::vector<double>& v) {
    std::vector<double> out(static_cast<std::size_t>(p));
    if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(p), v[0]);
    for (int j = 0; j < p; ++j) {
      double pos = static_cast<double>(j) * (static_cast<double>(v.size()) - 1.0) / (p - 1.0);
      std::size_t lo = static_cast<std::size_t>(std::floor(pos));
      std::size_t hi = std::min(lo + 1, v.size() - 1);
      double frac = pos - std::floor(pos);
      out[static_cast<std::size_t>(j)] = (1.0 - frac) * v[lo] + frac * v[hi];
    }
    return out;
  };
  return QaoaParams(stretch(prev.gammas), stretch(prev.betas));
}

}  // namespace detail

/// Optimizes layer counts 1..max_p in sequence, seeding each level with a
/// linear ramp, the previous level's optimum padded with a zero layer, and
/// random draws (restarts_at(level) initializations in total). Returns the
/// best result per level, sign-canonicalized so the first gamma is >= 0
/// (the energy is invariant under negating all angles).
inline std::vector<OptimizedParams> optimize_levels(
    const CostDiagonal& diag, int max_p, const std::function<int(int)>& restarts_at,
    std::uint64_t seed, const OptimizeOptions& opts = {},
    const std::function<std::vector<QaoaParams>(int)>& extra_inits = nullptr) {
  if (max_p < 1) throw std::invalid_argument("optimize_levels: p >= 1 required");

  ObjectiveFn objective = [&diag](const std::vector<double>& v) {
    return expectation(qaoa_state(diag, QaoaParams::from_flat(v)), diag);
  };
  GradientFn gradient = nullptr;
  if (opts.analytic_gradient)
    gradient = [&diag](const std::vector<double>& v) {
      return qaoa_energy_and_gradient(diag, QaoaParams::from_flat(v)).second;
    };

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> ug(-opts.gamma_bound, opts.gamma_bound);
  std::uniform_real_distribution<double> ub(-opts.beta_bound, opts.beta_bound);

  std::vector<OptimizedParams> levels;
  for (int layers = 1; layers <= max_p; ++layers) {
    std::vector<QaoaParams> inits;
    inits.push_back(detail::linear_ramp_init(layers, opts.gamma_bound, opts.beta_bound));
    inits.push_back(detail::linear_ramp_init(layers, 0.4 * opts.gamma_bound, 0.4 * opts.beta_bound));
    if (layers > 1) {
      inits.push_back(detail::interp_extend(levels.back().params));
      inits.push_back(detail::pad_with_half_layer(levels.back().params));
      inits.push_back(detail::pad_with_zero_layer(levels.back().params));
    }
    if (extra_inits)
      for (auto& extra : extra_inits(layers))
        if (extra.p == layers) inits.push_back(std::move(extra));
    if (!opts.deterministic_inits_only) {
      int total_inits = std::max(restarts_at(layers), static_cast<int>(inits.size()));
      while (static_cast<int>(inits.size()) < total_inits) {
        std::vector<double> g(static_cast<std::size_t>(layers)), b(static_cast<std::size_t>(layers));
        for (auto& v : g) v = ug(rng);
        for (auto& v : b) v = ub(rng);
        inits.emplace_back(std::move(g), std::move(b));
      }
    }

    std::vector<double> lo(2 * static_cast<std::size_t>(layers)), hi(2 * static_cast<std::size_t>(layers));
    for (int k = 0; k < layers; ++k) {
      lo[static_cast<std::size_t>(k)] = -opts.gamma_bound;
      hi[static_cast<std::size_t>(k)] = opts.gamma_bound;
      lo[static_cast<std::size_t>(layers + k)] = -opts.beta_bound;
      hi[static_cast<std::size_t>(layers + k)] = opts.beta_bound;
    }

    BoxBfgsOptions bopts;
    bopts.max_iters = opts.max_iters;
    OptimizedParams best;
    for (const auto& init : inits) {
      auto r = minimize_box_bfgs(objective, init.flat(), lo, hi, gradient, bopts);
      if (r.f < best.energy) {
        best.energy = r.f;
        best.params = QaoaParams::from_flat(r.x);
        best.converged = r.converged;
      }
    }
    if (!best.params.gammas.empty() && best.params.gammas[0] < 0.0) {
      for (auto& v : best.params.gammas) v = -v;
      for (auto& v : best.params.betas) v = -v;
    }
    levels.push_back(std::move(best));
  }
  return levels;
}

/// Best local minimizer of the QAOA energy over (gamma, beta) across
/// `restarts` initializations per level (linear ramps, the nesting guess
/// padded from one fewer layer, the rest random). Deterministic under seed.
inline OptimizedParams optimize_params(const CostDiagonal& diag, int p, int restarts,
                                       std::uint64_t seed, const OptimizeOptions& opts = {}) {
  if (restarts < 1) throw std::invalid_argument("optimize_params: restarts >= 1 required");
  auto restarts_at = [&](int) { return restarts; };
  return optimize_levels(diag, p, restarts_at, seed, opts).back();
}

}  // namespace qeopt
