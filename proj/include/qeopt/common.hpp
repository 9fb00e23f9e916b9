// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qeopt {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a stream index.
// splitmix64 finalizer; stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(derive_seed(seed, stream));
}

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return std::string(buf);
}

// --- bit-string helpers -------------------------------------------------
//
// Convention used throughout: variable i is bit i of the basis-state index
// (index = sum_i x_i 2^i) and character i of the printable string, so
// "011" means x0=0, x1=1, x2=1.

inline std::string bits_to_string(const std::vector<std::uint8_t>& x) {
  std::string s(x.size(), '0');
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? '1' : '0';
  return s;
}

inline std::vector<std::uint8_t> string_to_bits(const std::string& s) {
  std::vector<std::uint8_t> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw std::invalid_argument("bit-string must contain only 0/1");
    x[i] = s[i] == '1' ? 1 : 0;
  }
  return x;
}

inline std::vector<std::uint8_t> index_to_bits(std::uint64_t k, int n) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (k >> i) & 1u;
  return x;
}

inline std::uint64_t bits_to_index(const std::vector<std::uint8_t>& x) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) k |= (1ULL << i);
  return k;
}

inline std::string index_to_string(std::uint64_t k, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if ((k >> i) & 1u) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

inline std::uint64_t string_to_index(const std::string& s) {
  return bits_to_index(string_to_bits(s));
}

inline int hamming_distance(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: width mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

inline std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
double median_of(std::vector<T> v) {
  if (v.empty()) throw std::invalid_argument("median of empty vector");
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return static_cast<double>(v[m]);
  return 0.5 * (static_cast<double>(v[m - 1]) + static_cast<double>(v[m]));
}

}  // namespace qeopt
