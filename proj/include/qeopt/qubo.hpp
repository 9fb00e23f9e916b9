// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qeopt/graph.hpp"

namespace qeopt {

enum class Sense { minimize, maximize };

inline std::string sense_to_string(Sense s) { return s == Sense::minimize ? "min" : "max"; }

inline Sense sense_from_string(const std::string& s) {
  if (s == "min" || s == "minimize") return Sense::minimize;
  if (s == "max" || s == "maximize") return Sense::maximize;
  throw std::invalid_argument("unknown sense: " + s);
}

/// Spin assignment z in {+1,-1}^n. Related to bits by x = (1-z)/2,
/// i.e. z=+1 <-> x=0.
struct SpinAssignment {
  std::vector<int> z;

  static SpinAssignment from_bits(const std::vector<std::uint8_t>& x) {
    SpinAssignment s;
    s.z.reserve(x.size());
    for (auto b : x) s.z.push_back(b ? -1 : +1);
    return s;
  }
  static SpinAssignment from_index(std::uint64_t k, int n) { return from_bits(index_to_bits(k, n)); }

  std::vector<std::uint8_t> to_bits() const {
    std::vector<std::uint8_t> x;
    x.reserve(z.size());
    for (int s : z) x.push_back(s < 0 ? 1 : 0);
    return x;
  }
};

/// Max-Cut spin objective: sum over edges of w_ij z_i z_j.
/// Minimizing this over z solves Max-Cut; the cut value of the induced
/// partition is (total_weight - value) / 2.
inline double maxcut_energy(const WeightedGraph& g, const SpinAssignment& z) {
  if (static_cast<int>(z.z.size()) != g.n())
    throw std::invalid_argument("maxcut_energy: assignment length != vertex count");
  double e = 0.0;
  for (const auto& ed : g.edges())
    e += ed.w * z.z[static_cast<std::size_t>(ed.u)] * z.z[static_cast<std::size_t>(ed.v)];
  return e;
}

/// Quadratic unconstrained binary optimization instance:
/// objective(x) = x^T Q x + c^T x with x in {0,1}^n, optimized in the
/// direction given by `sense`. Q is stored dense and symmetric.
class QuboInstance {
 public:
  QuboInstance() = default;

  QuboInstance(int n, std::vector<double> q_dense, std::vector<double> c, Sense sense)
      : n_(n), q_(std::move(q_dense)), c_(std::move(c)), sense_(sense) {
    if (n_ < 0) throw std::invalid_argument("qubo: negative size");
    if (q_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_))
      throw std::invalid_argument("qubo: Q has wrong dimensions");
    if (c_.size() != static_cast<std::size_t>(n_))
      throw std::invalid_argument("qubo: c has wrong length");
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        double a = q_[idx(i, j)], b = q_[idx(j, i)];
        if (a != b) {  // symmetrize off-diagonal input
          double m = 0.5 * (a + b);
          q_[idx(i, j)] = m;
          q_[idx(j, i)] = m;
        }
      }
  }

  static QuboInstance zeros(int n, Sense sense) {
    return QuboInstance(n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0),
                        std::vector<double>(static_cast<std::size_t>(n), 0.0), sense);
  }

  int n() const { return n_; }
  Sense sense() const { return sense_; }
  double q(int i, int j) const { return q_[idx(i, j)]; }
  double c(int i) const { return c_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& c_vector() const { return c_; }

  void set_q(int i, int j, double v) {
    q_[idx(i, j)] = v;
    q_[idx(j, i)] = v;
  }
  void set_c(int i, double v) { c_[static_cast<std::size_t>(i)] = v; }
  void add_q(int i, int j, double v) {
    q_[idx(i, j)] += v;
    if (i != j) q_[idx(j, i)] += v;
  }
  void add_c(int i, double v) { c_[static_cast<std::size_t>(i)] += v; }

  /// Objective value in the instance's own orientation.
  double objective(const std::vector<std::uint8_t>& x) const {
    if (x.size() != static_cast<std::size_t>(n_))
      throw std::invalid_argument("qubo objective: bit-string length != n");
    double e = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (!x[static_cast<std::size_t>(i)]) continue;
      e += q_[idx(i, i)] + c_[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < n_; ++j)
        if (x[static_cast<std::size_t>(j)]) e += 2.0 * q_[idx(i, j)];
    }
    return e;
  }

  /// Objective in minimization orientation: negated when sense is maximize.
  /// Heuristics and the emulator always minimize this value.
  double min_objective(const std::vector<std::uint8_t>& x) const {
    double e = objective(x);
    return sense_ == Sense::maximize ? -e : e;
  }

  /// Converts a minimization-orientation value back to the reported sense.
  double report(double min_value) const { return sense_ == Sense::maximize ? -min_value : min_value; }

  /// Equivalent instance with sense == minimize.
  QuboInstance to_minimize() const {
    if (sense_ == Sense::minimize) return *this;
    std::vector<double> q = q_, c = c_;
    for (auto& v : q) v = -v;
    for (auto& v : c) v = -v;
    return QuboInstance(n_, std::move(q), std::move(c), Sense::minimize);
  }

  /// Sparse view used by local search: list of (j, coupling) per variable with
  /// coupling = 2*Q_ij in minimization orientation, plus the linear part
  /// a_i = Q_ii + c_i (also minimization orientation).
  struct MinView {
    std::vector<double> linear;
    std::vector<std::vector<std::pair<int, double>>> couplings;
  };

  MinView min_view() const {
    double sgn = sense_ == Sense::maximize ? -1.0 : 1.0;
    MinView v;
    v.linear.resize(static_cast<std::size_t>(n_));
    v.couplings.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      v.linear[static_cast<std::size_t>(i)] = sgn * (q_[idx(i, i)] + c_[static_cast<std::size_t>(i)]);
      for (int j = 0; j < n_; ++j) {
        if (j == i) continue;
        double qij = q_[idx(i, j)];
        if (qij != 0.0)
          v.couplings[static_cast<std::size_t>(i)].push_back({j, sgn * 2.0 * qij});
      }
    }
    return v;
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
  }

  int n_ = 0;
  std::vector<double> q_;
  std::vector<double> c_;
  Sense sense_ = Sense::minimize;
};

inline double qubo_energy(const QuboInstance& q, const std::vector<std::uint8_t>& x) {
  return q.objective(x);
}

/// Max-Cut as a QUBO in the 0/1 change of variables:
/// objective(x) = sum_ij w_ij (x_i + x_j - 2 x_i x_j) = cut value of x,
/// sense = maximize.
inline QuboInstance maxcut_to_qubo(const WeightedGraph& g) {
  QuboInstance q = QuboInstance::zeros(g.n(), Sense::maximize);
  for (const auto& e : g.edges()) {
    q.add_q(e.u, e.v, -e.w);  // x^T Q x contributes 2*Q_uv x_u x_v
    q.add_c(e.u, e.w);
    q.add_c(e.v, e.w);
  }
  return q;
}

/// MIS as a penalized QUBO: maximize sum_i x_i - lambda sum_edges x_i x_j,
/// lambda >= 1 so no independent-set constraint violation can pay off.
inline QuboInstance mis_to_qubo(const WeightedGraph& g, double lambda) {
  if (lambda < 1.0) throw std::invalid_argument("mis_to_qubo: lambda >= 1 required");
  QuboInstance q = QuboInstance::zeros(g.n(), Sense::maximize);
  for (int i = 0; i < g.n(); ++i) q.set_c(i, 1.0);
  for (const auto& e : g.edges()) q.add_q(e.u, e.v, -lambda / 2.0);
  return q;
}

/// Spin (Ising) representation of a QUBO in minimization orientation:
///   H(z) = constant + sum_i linear[i] z_i + sum_{(i,j)} quad z_i z_j
/// with z_i = 1 - 2 x_i, satisfying H(z) == min_objective(x(z)) for all z.
struct SpinHamiltonian {
  int n = 0;
  double constant = 0.0;
  std::vector<double> linear;
  std::vector<Edge> quadratic;  // quadratic coefficient stored in Edge::w

  double value(const SpinAssignment& z) const {
    double e = constant;
    for (int i = 0; i < n; ++i) e += linear[static_cast<std::size_t>(i)] * z.z[static_cast<std::size_t>(i)];
    for (const auto& t : quadratic)
      e += t.w * z.z[static_cast<std::size_t>(t.u)] * z.z[static_cast<std::size_t>(t.v)];
    return e;
  }
};

inline SpinHamiltonian cost_hamiltonian_coeffs(const QuboInstance& q) {
  double sgn = q.sense() == Sense::maximize ? -1.0 : 1.0;
  int n = q.n();
  SpinHamiltonian h;
  h.n = n;
  h.linear.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double a = q.q(i, i) + q.c(i);
    h.constant += sgn * a / 2.0;
    h.linear[static_cast<std::size_t>(i)] -= sgn * a / 2.0;
    for (int j = i + 1; j < n; ++j) {
      double b = q.q(i, j);
      if (b == 0.0) continue;
      // 2*Q_ij x_i x_j with x = (1-z)/2
      h.constant += sgn * b / 2.0;
      h.linear[static_cast<std::size_t>(i)] -= sgn * b / 2.0;
      h.linear[static_cast<std::size_t>(j)] -= sgn * b / 2.0;
      h.quadratic.push_back({i, j, sgn * b / 2.0});
    }
  }
  return h;
}

/// Full diagonal of a cost function over all 2^n bit-strings.
struct CostDiagonal {
  int n = 0;
  std::vector<double> values;
  double min_value = 0.0;
  double max_value = 0.0;

  void finalize() {
    min_value = std::numeric_limits<double>::infinity();
    max_value = -std::numeric_limits<double>::infinity();
    for (double v : values) {
      min_value = std::min(min_value, v);
      max_value = std::max(max_value, v);
    }
  }
};

inline constexpr int kDefaultEmulationCap = 26;

inline void check_emulation_cap(int n, int cap) {
  if (n > cap)
    throw std::invalid_argument("instance size " + std::to_string(n) +
                                " exceeds emulation cap " + std::to_string(cap));
  if (n < 1) throw std::invalid_argument("instance must have at least one variable");
}

/// Exhaustive spectrum of the objective in the instance's own orientation:
/// values[k] = objective(bits(k)).
inline CostDiagonal brute_force_spectrum(const QuboInstance& q, int cap = kDefaultEmulationCap) {
  check_emulation_cap(q.n(), cap);
  CostDiagonal d;
  d.n = q.n();
  std::size_t size = 1ULL << q.n();
  d.values.resize(size);
  for (std::size_t k = 0; k < size; ++k)
    d.values[k] = q.objective(index_to_bits(k, q.n()));
  d.finalize();
  return d;
}

// --- QAOA phase diagonals ---------------------------------------------------
//
// Diagonals fed to the phase layer exp(i gamma H_C). For Max-Cut the
// convention is the plain ZZ form H(z) = sum w_ij z_i z_j (coefficient w_ij
// per edge); for everything else the exact minimization-orientation
// objective is used. Both have the intended optimum as their ground state.

/// Max-Cut phase diagonal: values[k] = sum_edges w_ij z_i z_j at z(k).
inline CostDiagonal maxcut_phase_diagonal(const WeightedGraph& g, int cap = kDefaultEmulationCap) {
  check_emulation_cap(g.n(), cap);
  CostDiagonal d;
  d.n = g.n();
  std::size_t size = 1ULL << g.n();
  d.values.assign(size, 0.0);
  for (const auto& e : g.edges()) {
    std::uint64_t mu = 1ULL << e.u, mv = 1ULL << e.v;
    for (std::size_t k = 0; k < size; ++k) {
      bool cut = ((k & mu) != 0) != ((k & mv) != 0);
      d.values[k] += cut ? -e.w : e.w;
    }
  }
  d.finalize();
  return d;
}

/// Phase diagonal of a general QUBO: the minimization-orientation objective.
inline CostDiagonal qubo_phase_diagonal(const QuboInstance& q, int cap = kDefaultEmulationCap) {
  check_emulation_cap(q.n(), cap);
  CostDiagonal d;
  d.n = q.n();
  std::size_t size = 1ULL << q.n();
  d.values.resize(size);
  for (std::size_t k = 0; k < size; ++k)
    d.values[k] = q.min_objective(index_to_bits(k, q.n()));
  d.finalize();
  return d;
}

/// MIS phase diagonal, equal to the penalized-QUBO minimization objective
/// (the local-Z plus quarter-weight ZZ spin form shifted by a constant).
inline CostDiagonal mis_phase_diagonal(const WeightedGraph& g, double lambda,
                                       int cap = kDefaultEmulationCap) {
  return qubo_phase_diagonal(mis_to_qubo(g, lambda), cap);
}

}  // namespace qeopt
