// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "qeopt/common.hpp"

namespace qeopt {

/// Histogram of measured bit-strings. Keys all have width n; total is the
/// shot count. Ordered map so iteration order is deterministic.
struct SampleSet {
  int n = 0;
  long long total = 0;
  std::map<std::string, long long> counts;

  void add(const std::string& s, long long c = 1) {
    if (static_cast<int>(s.size()) != n) throw std::invalid_argument("sample: wrong bit width");
    if (c < 0) throw std::invalid_argument("sample: negative count");
    if (c == 0) return;
    counts[s] += c;
    total += c;
  }

  void validate() const {
    long long sum = 0;
    for (const auto& [s, c] : counts) {
      if (static_cast<int>(s.size()) != n) throw std::runtime_error("sample set: key width mismatch");
      if (c < 0) throw std::runtime_error("sample set: negative count");
      sum += c;
    }
    if (sum != total) throw std::runtime_error("sample set: total does not match counts");
  }

  bool uniform_counts() const {
    if (counts.empty()) return true;
    long long c0 = counts.begin()->second;
    for (const auto& [s, c] : counts)
      if (c != c0) return false;
    return true;
  }
};

}  // namespace qeopt
