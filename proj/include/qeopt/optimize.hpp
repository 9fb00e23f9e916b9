// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace qeopt {

// Small dense numerical optimization utilities used by the emulator's
// parameter search and the prediction-table fits. Dimensions are tiny
// (at most ~2*6 QAOA angles or 4 fit coefficients), so plain dense
// linear algebra is fine.

using ObjectiveFn = std::function<double(const std::vector<double>&)>;
using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;

inline std::vector<double> central_diff_gradient(const ObjectiveFn& f, const std::vector<double>& x,
                                                 double step = 1e-6) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = xp[i];
    xp[i] = orig + step;
    double fp = f(xp);
    xp[i] = orig - step;
    double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

struct BoxBfgsOptions {
  int max_iters = 120;
  double grad_tol = 1e-6;   // infinity norm of the projected gradient
  double f_tol = 1e-12;     // relative objective change
  double fd_step = 1e-6;    // central-difference step when no gradient given
};

struct BoxBfgsResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Quasi-Newton (BFGS) minimization with simple box constraints handled by
/// clipping trial points onto the box and measuring convergence with the
/// projected gradient. Gradients default to central differences.
inline BoxBfgsResult minimize_box_bfgs(const ObjectiveFn& f, const std::vector<double>& x0,
                                       const std::vector<double>& lo, const std::vector<double>& hi,
                                       const GradientFn& grad = nullptr,
                                       const BoxBfgsOptions& opts = {}) {
  const std::size_t d = x0.size();
  auto clip = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < d; ++i) x[i] = std::min(hi[i], std::max(lo[i], x[i]));
  };
  auto gradient = [&](const std::vector<double>& x) {
    return grad ? grad(x) : central_diff_gradient(f, x, opts.fd_step);
  };
  // Projected gradient: zero out components pushing outside an active bound.
  auto projected = [&](const std::vector<double>& x, const std::vector<double>& g) {
    std::vector<double> pg = g;
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] <= lo[i] + 1e-12 && g[i] > 0) pg[i] = 0.0;
      if (x[i] >= hi[i] - 1e-12 && g[i] < 0) pg[i] = 0.0;
    }
    return pg;
  };
  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::fabs(a));
    return m;
  };

  BoxBfgsResult res;
  res.x = x0;
  clip(res.x);
  res.f = f(res.x);
  std::vector<double> g = gradient(res.x);

  // inverse Hessian approximation, row-major d x d, starts as identity
  std::vector<double> h(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 1.0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iterations = iter + 1;
    std::vector<double> pg = projected(res.x, g);
    if (inf_norm(pg) < opts.grad_tol) {
      res.converged = true;
      break;
    }
    std::vector<double> dir(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) dir[i] -= h[i * d + j] * g[j];
    double slope = 0.0;
    for (std::size_t i = 0; i < d; ++i) slope += dir[i] * g[i];
    if (!(slope < 0.0)) {  // reset on a non-descent direction
      std::fill(h.begin(), h.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 1.0;
      for (std::size_t i = 0; i < d; ++i) dir[i] = -g[i];
      slope = 0.0;
      for (std::size_t i = 0; i < d; ++i) slope += dir[i] * g[i];
      if (!(slope < 0.0)) break;
    }

    // backtracking Armijo line search on the clipped path
    double t = 1.0;
    std::vector<double> xn(d);
    double fn = res.f;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < d; ++i) xn[i] = res.x[i] + t * dir[i];
      clip(xn);
      fn = f(xn);
      double moved2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double dd = xn[i] - res.x[i];
        moved2 += dd * dd;
      }
      if (moved2 == 0.0) break;
      if (fn <= res.f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = inf_norm(pg) < 1e2 * opts.grad_tol;
      break;
    }

    std::vector<double> gn = gradient(xn);
    std::vector<double> s(d), y(d);
    for (std::size_t i = 0; i < d; ++i) {
      s[i] = xn[i] - res.x[i];
      y[i] = gn[i] - g[i];
    }
    double sy = 0.0;
    for (std::size_t i = 0; i < d; ++i) sy += s[i] * y[i];
    double f_prev = res.f;
    res.x = xn;
    res.f = fn;
    g = gn;
    if (sy > 1e-12) {  // BFGS update of the inverse Hessian
      std::vector<double> hy(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) hy[i] += h[i * d + j] * y[j];
      double yhy = 0.0;
      for (std::size_t i = 0; i < d; ++i) yhy += y[i] * hy[i];
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          h[i * d + j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) -
                          (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }
    }
    if (std::fabs(f_prev - res.f) <= opts.f_tol * (1.0 + std::fabs(res.f))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// --- Levenberg-Marquardt --------------------------------------------------

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct LmOptions {
  int max_iters = 300;
  double tol = 1e-12;
  double fd_step = 1e-7;
};

struct LmResult {
  std::vector<double> params;
  double sse = std::numeric_limits<double>::infinity();
  bool converged = false;
};

/// Levenberg-Marquardt least squares with a finite-difference Jacobian.
inline LmResult lm_fit(const ResidualFn& residuals, const std::vector<double>& p0,
                       const LmOptions& opts = {}) {
  const std::size_t d = p0.size();
  auto sse_of = [](const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  };

  LmResult res;
  res.params = p0;
  std::vector<double> r = residuals(res.params);
  res.sse = sse_of(r);
  const std::size_t m = r.size();
  double mu = 1e-3;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // finite-difference Jacobian, m x d
    std::vector<double> jac(m * d);
    std::vector<double> p = res.params;
    for (std::size_t j = 0; j < d; ++j) {
      double h = opts.fd_step * std::max(1.0, std::fabs(p[j]));
      double orig = p[j];
      p[j] = orig + h;
      std::vector<double> rp = residuals(p);
      p[j] = orig;
      for (std::size_t i = 0; i < m; ++i) jac[i * d + j] = (rp[i] - r[i]) / h;
    }
    // normal equations (J^T J + mu I) dp = -J^T r
    std::vector<double> a(d * d, 0.0), b(d, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        b[j] -= jac[i * d + j] * r[i];
        for (std::size_t k = 0; k < d; ++k) a[j * d + k] += jac[i * d + j] * jac[i * d + k];
      }

    bool stepped = false;
    for (int damp = 0; damp < 25; ++damp) {
      std::vector<double> ad = a;
      for (std::size_t j = 0; j < d; ++j) ad[j * d + j] += mu * (1.0 + a[j * d + j]);
      // Gaussian elimination with partial pivoting
      std::vector<double> rhs = b;
      std::vector<double> dp(d, 0.0);
      bool singular = false;
      std::vector<std::size_t> piv(d);
      for (std::size_t i = 0; i < d; ++i) piv[i] = i;
      for (std::size_t col = 0; col < d; ++col) {
        std::size_t best = col;
        for (std::size_t row = col + 1; row < d; ++row)
          if (std::fabs(ad[piv[row] * d + col]) > std::fabs(ad[piv[best] * d + col])) best = row;
        std::swap(piv[col], piv[best]);
        double pivot = ad[piv[col] * d + col];
        if (std::fabs(pivot) < 1e-300) { singular = true; break; }
        for (std::size_t row = col + 1; row < d; ++row) {
          double factor = ad[piv[row] * d + col] / pivot;
          for (std::size_t k = col; k < d; ++k) ad[piv[row] * d + k] -= factor * ad[piv[col] * d + k];
          rhs[piv[row]] -= factor * rhs[piv[col]];
        }
      }
      if (!singular) {
        for (std::size_t col = d; col-- > 0;) {
          double s = rhs[piv[col]];
          for (std::size_t k = col + 1; k < d; ++k) s -= ad[piv[col] * d + k] * dp[k];
          dp[col] = s / ad[piv[col] * d + col];
        }
        std::vector<double> pn(d);
        for (std::size_t j = 0; j < d; ++j) pn[j] = res.params[j] + dp[j];
        std::vector<double> rn = residuals(pn);
        double sn = sse_of(rn);
        if (std::isfinite(sn) && sn < res.sse) {
          double improvement = res.sse - sn;
          res.params = pn;
          r = rn;
          res.sse = sn;
          mu = std::max(mu * 0.3, 1e-12);
          stepped = true;
          if (improvement <= opts.tol * (1.0 + res.sse)) res.converged = true;
          break;
        }
      }
      mu *= 4.0;
    }
    if (!stepped || res.converged) {
      if (!stepped) res.converged = res.sse < 1e30;
      break;
    }
  }
  return res;
}

/// Ordinary least squares for y ~ a*x + b. Returns {a, b}.
inline std::pair<double, double> fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("fit_affine: bad input");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (std::fabs(denom) < 1e-14) return {0.0, sy / n};
  double a = (n * sxy - sx * sy) / denom;
  double b = (sy - a * sx) / n;
  return {a, b};
}

}  // namespace qeopt
