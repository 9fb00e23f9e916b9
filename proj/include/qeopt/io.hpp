// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qeopt/qubo.hpp"
#include "qeopt/sample_set.hpp"

namespace qeopt {

using json = nlohmann::json;

// Line-oriented instance format shared by graphs and QUBOs:
//   n m sense
//   i j w     (i < j: quadratic term / edge weight)
//   i i w     (linear term / node weight)
// Indices are 0-based; m counts the term lines. For a QUBO, `i j w` carries
// the combined coefficient of x_i x_j (i.e. 2*Q_ij) and `i i w` carries
// c_i. Values are written with round-trip-exact decimal formatting.

namespace detail {

struct TermFile {
  int n = 0;
  Sense sense = Sense::maximize;
  std::vector<Edge> quadratic;
  std::vector<std::pair<int, double>> linear;
};

inline TermFile parse_term_file(std::istream& in, const std::string& what) {
  TermFile f;
  std::string line;
  long long m = -1;
  long long seen = 0;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    if (m < 0) {
      std::string sense_tok;
      if (!(ls >> f.n >> m >> sense_tok)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw std::runtime_error(what + ": malformed header line");
      }
      f.sense = sense_from_string(sense_tok);
      continue;
    }
    int i, j;
    double w;
    if (!(ls >> i >> j >> w)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error(what + ": malformed term line: " + line);
    }
    if (!std::isfinite(w)) throw std::runtime_error(what + ": non-finite coefficient");
    if (i < 0 || j < 0 || i >= f.n || j >= f.n) throw std::runtime_error(what + ": index out of range");
    if (i == j)
      f.linear.push_back({i, w});
    else
      f.quadratic.push_back({std::min(i, j), std::max(i, j), w});
    seen++;
  }
  if (m < 0) throw std::runtime_error(what + ": missing header");
  if (seen != m) throw std::runtime_error(what + ": header term count does not match body");
  return f;
}

inline void write_term_file(std::ostream& out, const TermFile& f) {
  out << f.n << ' ' << (f.quadratic.size() + f.linear.size()) << ' ' << sense_to_string(f.sense) << '\n';
  for (const auto& e : f.quadratic)
    out << e.u << ' ' << e.v << ' ' << format_double(e.w) << '\n';
  for (const auto& [i, w] : f.linear) out << i << ' ' << i << ' ' << format_double(w) << '\n';
}

}  // namespace detail

inline void write_graph_text(std::ostream& out, const WeightedGraph& g, Sense sense = Sense::maximize) {
  detail::TermFile f;
  f.n = g.n();
  f.sense = sense;
  f.quadratic = g.edges();
  if (g.has_node_weights())
    for (int i = 0; i < g.n(); ++i)
      if (g.node_weights()[static_cast<std::size_t>(i)] != 0.0)
        f.linear.push_back({i, g.node_weights()[static_cast<std::size_t>(i)]});
  detail::write_term_file(out, f);
}

inline WeightedGraph read_graph_text(std::istream& in) {
  auto f = detail::parse_term_file(in, "graph");
  std::vector<double> nodew;
  if (!f.linear.empty()) {
    nodew.assign(static_cast<std::size_t>(f.n), 0.0);
    for (auto& [i, w] : f.linear) nodew[static_cast<std::size_t>(i)] = w;
  }
  return WeightedGraph(f.n, std::move(f.quadratic), std::move(nodew));
}

inline void write_qubo_text(std::ostream& out, const QuboInstance& q) {
  detail::TermFile f;
  f.n = q.n();
  f.sense = q.sense();
  for (int i = 0; i < q.n(); ++i) {
    double lin = q.c(i) + q.q(i, i);
    if (lin != 0.0) f.linear.push_back({i, lin});
    for (int j = i + 1; j < q.n(); ++j)
      if (q.q(i, j) != 0.0) f.quadratic.push_back({i, j, 2.0 * q.q(i, j)});
  }
  detail::write_term_file(out, f);
}

inline QuboInstance read_qubo_text(std::istream& in) {
  auto f = detail::parse_term_file(in, "qubo");
  QuboInstance q = QuboInstance::zeros(f.n, f.sense);
  for (const auto& e : f.quadratic) q.add_q(e.u, e.v, e.w / 2.0);
  for (const auto& [i, w] : f.linear) q.add_c(i, w);
  return q;
}

// JSON equivalents: {n, sense, linear:[...], quadratic:[[i,j,w],...]}.
// `linear` is the full length-n coefficient vector.

inline json graph_to_json(const WeightedGraph& g, Sense sense = Sense::maximize) {
  json j;
  j["n"] = g.n();
  j["sense"] = sense_to_string(sense);
  std::vector<double> lin(static_cast<std::size_t>(g.n()), 0.0);
  if (g.has_node_weights()) lin = g.node_weights();
  j["linear"] = lin;
  json quad = json::array();
  for (const auto& e : g.edges()) quad.push_back({e.u, e.v, e.w});
  j["quadratic"] = quad;
  return j;
}

inline WeightedGraph graph_from_json(const json& j) {
  int n = j.at("n").get<int>();
  std::vector<Edge> edges;
  for (const auto& t : j.at("quadratic"))
    edges.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
  std::vector<double> lin;
  if (j.contains("linear")) {
    lin = j.at("linear").get<std::vector<double>>();
    bool all_zero = true;
    for (double v : lin) all_zero &= v == 0.0;
    if (all_zero) lin.clear();
  }
  return WeightedGraph(n, std::move(edges), std::move(lin));
}

inline json qubo_to_json(const QuboInstance& q) {
  json j;
  j["n"] = q.n();
  j["sense"] = sense_to_string(q.sense());
  std::vector<double> lin(static_cast<std::size_t>(q.n()));
  for (int i = 0; i < q.n(); ++i) lin[static_cast<std::size_t>(i)] = q.c(i) + q.q(i, i);
  j["linear"] = lin;
  json quad = json::array();
  for (int i = 0; i < q.n(); ++i)
    for (int k = i + 1; k < q.n(); ++k)
      if (q.q(i, k) != 0.0) quad.push_back({i, k, 2.0 * q.q(i, k)});
  j["quadratic"] = quad;
  return j;
}

inline QuboInstance qubo_from_json(const json& j) {
  int n = j.at("n").get<int>();
  QuboInstance q = QuboInstance::zeros(n, sense_from_string(j.at("sense").get<std::string>()));
  if (j.contains("linear")) {
    auto lin = j.at("linear").get<std::vector<double>>();
    if (static_cast<int>(lin.size()) != n) throw std::runtime_error("qubo json: linear has wrong length");
    for (int i = 0; i < n; ++i) q.set_c(i, lin[static_cast<std::size_t>(i)]);
  }
  for (const auto& t : j.at("quadratic"))
    q.add_q(t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>() / 2.0);
  return q;
}

// Sample sets: text lines "bitstring count"; JSON {n, shots, counts:{...}}.

inline void write_samples_text(std::ostream& out, const SampleSet& s) {
  for (const auto& [key, c] : s.counts) out << key << ' ' << c << '\n';
}

inline SampleSet read_samples_text(std::istream& in) {
  SampleSet s;
  std::string key;
  long long c;
  bool first = true;
  while (in >> key >> c) {
    if (first) {
      s.n = static_cast<int>(key.size());
      first = false;
    }
    s.add(key, c);
  }
  return s;
}

inline json samples_to_json(const SampleSet& s) {
  json j;
  j["n"] = s.n;
  j["shots"] = s.total;
  json counts = json::object();
  for (const auto& [key, c] : s.counts) counts[key] = c;
  j["counts"] = counts;
  return j;
}

inline SampleSet samples_from_json(const json& j) {
  SampleSet s;
  s.n = j.at("n").get<int>();
  for (const auto& [key, c] : j.at("counts").items()) s.add(key, c.get<long long>());
  if (j.contains("shots") && j.at("shots").get<long long>() != s.total)
    throw std::runtime_error("sample json: shots does not match counts");
  return s;
}

// Small file helpers.

inline std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Atomic write: contents land in a temp file first, then rename.
inline void spill_file(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << contents;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename into place: " + path);
}

}  // namespace qeopt
