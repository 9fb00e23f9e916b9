// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Sample post-processing: readout-error correction by sparse tensored
// inversion of the per-qubit calibration matrices with a least-norm
// projection back onto the probability simplex, plus the energy, frequency,
// and Hamming refinement filters. All filters are deterministic.

#pragma once

#include <array>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qeopt/qubo.hpp"
#include "qeopt/sample_set.hpp"

namespace qeopt {

/// Per-qubit readout error rates: p = P(read 1 | prepared 0),
/// q = P(read 0 | prepared 1). Correction matrix per qubit:
///   Lambda = [[1-p, q], [p, 1-q]],
/// invertible as long as p + q < 1.
struct ReadoutModel {
  std::vector<std::pair<double, double>> qubits;

  explicit ReadoutModel(std::vector<std::pair<double, double>> pq = {}) : qubits(std::move(pq)) {
    for (auto [p, q] : qubits) {
      if (p < 0.0 || p >= 1.0 || q < 0.0 || q >= 1.0)
        throw std::invalid_argument("readout model: rates must be in [0,1)");
      if (p + q >= 1.0)
        throw std::invalid_argument("readout model: p + q must be < 1 (singular correction matrix)");
    }
  }

  static ReadoutModel uniform(int n, double p, double q) {
    return ReadoutModel(std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {p, q}));
  }

  int n() const { return static_cast<int>(qubits.size()); }
};

inline nlohmann::json readout_model_to_json(const ReadoutModel& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto [p, q] : m.qubits) arr.push_back({{"p", p}, {"q", q}});
  return nlohmann::json{{"qubits", arr}};
}

inline ReadoutModel readout_model_from_json(const nlohmann::json& j) {
  std::vector<std::pair<double, double>> pq;
  for (const auto& e : j.at("qubits")) pq.push_back({e.at("p").get<double>(), e.at("q").get<double>()});
  return ReadoutModel(std::move(pq));
}

struct FilterConfig {
  double energy_keep_fraction = 0.10;
  double frequency_threshold = 0.0005;  // 5 occurrences in 10000 samples
  double hamming_seed_fraction = 0.01;
  double hamming_expansion_fraction = 0.09;
  int readout_radius = 2;  // Hamming expansion radius for the corrected support

  void validate() const {
    auto frac = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!frac(energy_keep_fraction) || !frac(frequency_threshold) || !frac(hamming_seed_fraction) ||
        !frac(hamming_expansion_fraction))
      throw std::invalid_argument("filter config: fractions must be in (0,1]");
    if (hamming_seed_fraction + hamming_expansion_fraction > 1.0)
      throw std::invalid_argument("filter config: seed + expansion fraction must be <= 1");
    if (readout_radius < 0) throw std::invalid_argument("filter config: negative radius");
  }
};

inline nlohmann::json filter_config_to_json(const FilterConfig& c) {
  return nlohmann::json{{"energy_keep_fraction", c.energy_keep_fraction},
                        {"frequency_threshold", c.frequency_threshold},
                        {"hamming_seed_fraction", c.hamming_seed_fraction},
                        {"hamming_expansion_fraction", c.hamming_expansion_fraction},
                        {"readout_radius", c.readout_radius}};
}

inline FilterConfig filter_config_from_json(const nlohmann::json& j) {
  FilterConfig c;
  c.energy_keep_fraction = j.value("energy_keep_fraction", c.energy_keep_fraction);
  c.frequency_threshold = j.value("frequency_threshold", c.frequency_threshold);
  c.hamming_seed_fraction = j.value("hamming_seed_fraction", c.hamming_seed_fraction);
  c.hamming_expansion_fraction = j.value("hamming_expansion_fraction", c.hamming_expansion_fraction);
  c.readout_radius = j.value("readout_radius", c.readout_radius);
  return c;
}

namespace filter_detail {

/// Euclidean (least-norm) projection of v onto the simplex {x >= 0, sum x = s}.
inline std::vector<double> project_to_simplex(std::vector<double> v, double s) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  int support = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cum += sorted[i];
    double t = (cum - s) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) {
      theta = t;
      support = static_cast<int>(i + 1);
    }
  }
  if (support == 0) theta = (cum - s) / static_cast<double>(sorted.size());
  for (auto& x : v) x = std::max(0.0, x - theta);
  return v;
}

/// Largest-remainder rounding of nonnegative weights to integers with the
/// given total. Ties break on larger weight, then smaller index.
inline std::vector<long long> largest_remainder_round(const std::vector<double>& w, long long total) {
  double sum = 0.0;
  for (double x : w) sum += x;
  std::vector<long long> out(w.size(), 0);
  if (sum <= 0.0 || total <= 0) return out;
  std::vector<std::pair<double, std::size_t>> rem;
  long long assigned = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double exact = w[i] / sum * static_cast<double>(total);
    out[i] = static_cast<long long>(std::floor(exact));
    assigned += out[i];
    rem.push_back({exact - std::floor(exact), i});
  }
  std::sort(rem.begin(), rem.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (long long k = 0; k < total - assigned && k < static_cast<long long>(rem.size()); ++k)
    out[rem[static_cast<std::size_t>(k)].second] += 1;
  return out;
}

/// Occurrence-expanded keys sorted by (energy, lexicographic string).
inline std::vector<std::pair<double, std::string>> keys_by_energy(const SampleSet& s,
                                                                  const QuboInstance& q) {
  if (s.n != q.n()) throw std::invalid_argument("filter: sample width != instance size");
  std::vector<std::pair<double, std::string>> keys;
  keys.reserve(s.counts.size());
  for (const auto& [key, c] : s.counts) {
    (void)c;
    keys.push_back({q.min_objective(string_to_bits(key)), key});
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace filter_detail

/// Applies the tensored inverse of the per-qubit correction matrices on the
/// sample support expanded by a bounded Hamming neighborhood, projects the
/// result onto the probability simplex (removing negative mass in least-norm
/// fashion), and rounds back to the original shot count.
inline SampleSet readout_correct(const SampleSet& s, const ReadoutModel& model, int radius = 2) {
  if (model.n() != s.n) throw std::invalid_argument("readout_correct: model size != sample width");
  if (s.total == 0) return s;

  // inverse of [[1-p, q], [p, 1-q]] per qubit
  std::vector<std::array<double, 4>> inv(static_cast<std::size_t>(s.n));
  for (int j = 0; j < s.n; ++j) {
    auto [p, q] = model.qubits[static_cast<std::size_t>(j)];
    double det = 1.0 - p - q;
    inv[static_cast<std::size_t>(j)] = {(1.0 - q) / det, -q / det, -p / det, (1.0 - p) / det};
  }
  auto element = [&](int j, char to, char from) {
    return inv[static_cast<std::size_t>(j)][static_cast<std::size_t>((to == '1' ? 2 : 0) + (from == '1' ? 1 : 0))];
  };

  // target support: observed strings plus their Hamming ball of the given radius
  std::unordered_map<std::string, double> corrected;
  std::function<void(std::string&, int, int)> seed_ball = [&](std::string& key, int start, int left) {
    corrected.emplace(key, 0.0);
    if (left == 0) return;
    for (int j = start; j < s.n; ++j) {
      key[static_cast<std::size_t>(j)] = key[static_cast<std::size_t>(j)] == '0' ? '1' : '0';
      seed_ball(key, j + 1, left - 1);
      key[static_cast<std::size_t>(j)] = key[static_cast<std::size_t>(j)] == '0' ? '1' : '0';
    }
  };
  for (const auto& [key, c] : s.counts) {
    (void)c;
    std::string k = key;
    seed_ball(k, 0, radius);
  }

  // accumulate matrix elements between observed strings and nearby targets;
  // contributions fall off by a factor of order p (or q) per differing bit,
  // so pairs beyond the radius are dropped (this is the sparse approximation)
  for (const auto& [src, count] : s.counts) {
    double p_obs = static_cast<double>(count) / static_cast<double>(s.total);
    double diag = 1.0;
    for (int j = 0; j < s.n; ++j)
      diag *= element(j, src[static_cast<std::size_t>(j)], src[static_cast<std::size_t>(j)]);
    std::function<void(std::string&, int, int, double)> scatter = [&](std::string& key, int start,
                                                                      int left, double ratio) {
      auto it = corrected.find(key);
      if (it != corrected.end()) it->second += diag * ratio * p_obs;
      if (left == 0) return;
      for (int j = start; j < s.n; ++j) {
        char orig = key[static_cast<std::size_t>(j)];
        char flipped = orig == '0' ? '1' : '0';
        double factor = element(j, flipped, src[static_cast<std::size_t>(j)]) /
                        element(j, orig, src[static_cast<std::size_t>(j)]);
        key[static_cast<std::size_t>(j)] = flipped;
        scatter(key, j + 1, left - 1, ratio * factor);
        key[static_cast<std::size_t>(j)] = orig;
      }
    };
    std::string k = src;
    scatter(k, 0, radius, 1.0);
  }

  // least-norm projection onto the simplex, then integer rounding
  std::vector<std::string> keys;
  std::vector<double> vals;
  keys.reserve(corrected.size());
  for (const auto& [key, v] : corrected) {
    keys.push_back(key);
    vals.push_back(v);
  }
  // deterministic order
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<double> sorted_vals(vals.size());
  std::vector<std::string> sorted_keys(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted_keys[i] = keys[order[i]];
    sorted_vals[i] = vals[order[i]];
  }
  bool any_negative = false;
  for (double v : sorted_vals) any_negative |= v < 0.0;
  if (any_negative) sorted_vals = filter_detail::project_to_simplex(sorted_vals, 1.0);
  auto counts = filter_detail::largest_remainder_round(sorted_vals, s.total);

  SampleSet out;
  out.n = s.n;
  for (std::size_t i = 0; i < sorted_keys.size(); ++i)
    if (counts[i] > 0) out.add(sorted_keys[i], counts[i]);
  return out;
}

/// Keeps the ceil(keep_fraction * shots) lowest-energy occurrences, counts
/// expanded, ties broken by lexicographic bit-string.
inline SampleSet energy_filter(const SampleSet& s, const QuboInstance& q,
                               const FilterConfig& cfg = {}) {
  cfg.validate();
  if (s.total == 0) throw std::invalid_argument("energy_filter: empty sample set");
  long long quota = static_cast<long long>(std::ceil(cfg.energy_keep_fraction * static_cast<double>(s.total)));
  auto keys = filter_detail::keys_by_energy(s, q);
  SampleSet out;
  out.n = s.n;
  for (const auto& [energy, key] : keys) {
    (void)energy;
    if (quota <= 0) break;
    long long take = std::min(quota, s.counts.at(key));
    out.add(key, take);
    quota -= take;
  }
  return out;
}

/// Keeps strings whose frequency meets the threshold; if none qualify the
/// threshold is halved until some do. A uniform histogram passes through
/// unfiltered.
inline SampleSet frequency_filter(const SampleSet& s, const FilterConfig& cfg = {}) {
  cfg.validate();
  if (s.total == 0) throw std::invalid_argument("frequency_filter: empty sample set");
  if (s.uniform_counts()) return s;
  double threshold = cfg.frequency_threshold;
  for (;;) {
    SampleSet out;
    out.n = s.n;
    for (const auto& [key, c] : s.counts)
      if (static_cast<double>(c) >= threshold * static_cast<double>(s.total)) out.add(key, c);
    if (out.total > 0) return out;
    threshold /= 2.0;
  }
}

/// Seeds with the lowest-energy occurrences (seed fraction), then expands
/// with the occurrences closest in Hamming distance to any seed string
/// (expansion fraction), ties by energy then lexicographic order.
inline SampleSet hamming_filter(const SampleSet& s, const QuboInstance& q,
                                const FilterConfig& cfg = {}) {
  cfg.validate();
  if (s.total == 0) throw std::invalid_argument("hamming_filter: empty sample set");
  long long seed_quota =
      static_cast<long long>(std::ceil(cfg.hamming_seed_fraction * static_cast<double>(s.total)));
  long long expand_quota =
      static_cast<long long>(std::ceil(cfg.hamming_expansion_fraction * static_cast<double>(s.total)));

  auto keys = filter_detail::keys_by_energy(s, q);
  SampleSet out;
  out.n = s.n;
  std::map<std::string, long long> left;
  for (const auto& [key, c] : s.counts) left[key] = c;

  std::vector<std::string> seed_strings;
  long long quota = seed_quota;
  for (const auto& [energy, key] : keys) {
    (void)energy;
    if (quota <= 0) break;
    long long take = std::min(quota, left[key]);
    out.add(key, take);
    left[key] -= take;
    quota -= take;
    seed_strings.push_back(key);
  }

  // remaining occurrences ranked by distance to the nearest seed string
  struct Candidate {
    int dist;
    double energy;
    std::string key;
  };
  std::vector<Candidate> cands;
  for (const auto& [energy, key] : keys) {
    if (left[key] <= 0) continue;
    int best = s.n + 1;
    for (const auto& seed : seed_strings) best = std::min(best, hamming_distance(key, seed));
    cands.push_back({best, energy, key});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.key < b.key;
  });
  quota = expand_quota;
  for (const auto& c : cands) {
    if (quota <= 0) break;
    long long take = std::min(quota, left[c.key]);
    out.add(c.key, take);
    quota -= take;
  }
  return out;
}

}  // namespace qeopt
