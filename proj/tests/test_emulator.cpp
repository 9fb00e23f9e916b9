// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qeopt/emulator.hpp"

using namespace qeopt;

namespace {

QaoaParams random_params(int p, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> ug(-kPi, kPi), ub(-kPi / 2, kPi / 2);
  std::vector<double> g(static_cast<std::size_t>(p)), b(static_cast<std::size_t>(p));
  for (auto& v : g) v = ug(rng);
  for (auto& v : b) v = ub(rng);
  return QaoaParams(std::move(g), std::move(b));
}

CostDiagonal random_maxcut_diag(int n, double p_edge, std::uint64_t seed) {
  WeightedGraph g = with_uniform_weights(make_erdos_renyi(n, p_edge, seed), -1.0, 1.0, seed + 1);
  return maxcut_phase_diagonal(g);
}

}  // namespace

TEST_CASE("qaoa state with zero angles is the uniform superposition", "[emulator]") {
  CostDiagonal diag = random_maxcut_diag(5, 0.5, 3);
  Statevector s = qaoa_state(diag, QaoaParams({0.0}, {0.0}));
  for (const auto& a : s.amps) {
    CHECK(a.real() == Catch::Approx(1.0 / std::sqrt(32.0)).margin(1e-12));
    CHECK(a.imag() == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("gamma = 0 leaves the measurement distribution uniform", "[emulator]") {
  CostDiagonal diag = random_maxcut_diag(6, 0.5, 4);
  for (double beta : {0.3, -1.1, 0.77}) {
    Statevector s = qaoa_state(diag, QaoaParams({0.0}, {beta}));
    for (const auto& a : s.amps) CHECK(std::norm(a) == Catch::Approx(1.0 / 64.0).margin(1e-12));
  }
}

TEST_CASE("two-qubit single-edge state matches the dense matrix oracle", "[emulator]") {
  WeightedGraph edge(2, {{0, 1, 1.0}});
  CostDiagonal diag = maxcut_phase_diagonal(edge);
  QaoaParams params = random_params(1, 99);
  Statevector s = qaoa_state(diag, params);
  auto oracle = qeopt_test::dense_qaoa_state(diag, params);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(s.amps[k] - oracle[k]) < 1e-10);
}

TEST_CASE("statevector matches dense oracle on random instances", "[emulator]") {
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + trial % 5;
    int p = 1 + trial % 3;
    CostDiagonal diag = random_maxcut_diag(n, 0.6, 500 + trial);
    QaoaParams params = random_params(p, 700 + trial);
    Statevector s = qaoa_state(diag, params);
    auto oracle = qeopt_test::dense_qaoa_state(diag, params);
    double max_err = 0.0;
    for (std::size_t k = 0; k < s.amps.size(); ++k)
      max_err = std::max(max_err, std::abs(s.amps[k] - oracle[k]));
    CHECK(max_err < 1e-10);
    CHECK(std::fabs(s.norm_squared() - 1.0) < 1e-10);
  }
}

TEST_CASE("every layer preserves the norm", "[emulator]") {
  CostDiagonal diag = random_maxcut_diag(8, 0.4, 8);
  Statevector s = uniform_state(8);
  Rng rng = make_rng(15);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int step = 0; step < 12; ++step) {
    if (step % 2 == 0)
      apply_phase_layer(s, diag, uni(rng));
    else
      apply_mixer_layer(s, uni(rng));
    CHECK(std::fabs(s.norm_squared() - 1.0) < 1e-10);
  }
}

TEST_CASE("expectation agrees with diagonal values and sampling", "[emulator]") {
  CostDiagonal diag = random_maxcut_diag(6, 0.5, 21);
  SECTION("uniform state gives the mean") {
    double mean = 0.0;
    for (double v : diag.values) mean += v;
    mean /= static_cast<double>(diag.values.size());
    CHECK(expectation(uniform_state(6), diag) == Catch::Approx(mean).margin(1e-12));
  }
  SECTION("basis state gives its diagonal entry") {
    Statevector basis;
    basis.n = 6;
    basis.amps.assign(64, {0.0, 0.0});
    basis.amps[13] = {1.0, 0.0};
    CHECK(expectation(basis, diag) == Catch::Approx(diag.values[13]).margin(1e-12));
  }
  SECTION("monte-carlo estimate within three standard errors") {
    Statevector s = qaoa_state(diag, random_params(2, 33));
    double exact = expectation(s, diag);
    SampleSet samples = sample(s, 1000000, 77);
    double est = 0.0, est2 = 0.0;
    QuboInstance q;  // evaluate via the diagonal directly
    for (const auto& [key, c] : samples.counts) {
      double v = diag.values[string_to_index(key)];
      est += v * static_cast<double>(c);
      est2 += v * v * static_cast<double>(c);
    }
    est /= static_cast<double>(samples.total);
    est2 /= static_cast<double>(samples.total);
    double se = std::sqrt(std::max(est2 - est * est, 0.0) / static_cast<double>(samples.total));
    CHECK(std::fabs(est - exact) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("rescaled approximation ratio endpoints", "[emulator]") {
  CostDiagonal diag = random_maxcut_diag(5, 0.6, 41);
  CHECK(ar_star(diag.min_value, diag) == Catch::Approx(1.0));
  CHECK(ar_star(diag.max_value, diag) == Catch::Approx(0.0));
  CHECK(ar_star(0.5 * (diag.min_value + diag.max_value), diag) == Catch::Approx(0.5));
  CostDiagonal flat;
  flat.n = 2;
  flat.values.assign(4, 3.0);
  flat.finalize();
  CHECK(ar_star(3.0, flat) == 1.0);
}

TEST_CASE("sampling behaviour", "[emulator]") {
  SECTION("basis state sampling is deterministic mass") {
    Statevector basis;
    basis.n = 4;
    basis.amps.assign(16, {0.0, 0.0});
    basis.amps[0] = {1.0, 0.0};
    SampleSet s = sample(basis, 100, 5);
    REQUIRE(s.counts.size() == 1);
    CHECK(s.counts.at("0000") == 100);
  }
  SECTION("uniform-state bit marginals stay within a five-sigma band") {
    Statevector s = uniform_state(6);
    SampleSet samples = sample(s, 100000, 9);
    double sigma = std::sqrt(0.25 / 100000.0);
    for (int bit = 0; bit < 6; ++bit) {
      long long ones = 0;
      for (const auto& [key, c] : samples.counts)
        if (key[static_cast<std::size_t>(bit)] == '1') ones += c;
      double frac = static_cast<double>(ones) / 100000.0;
      CHECK(std::fabs(frac - 0.5) < 5.0 * sigma);
    }
  }
  SECTION("fixed seed reproduces the sample set exactly") {
    Statevector s = qaoa_state(random_maxcut_diag(6, 0.5, 51), random_params(2, 52));
    SampleSet a = sample(s, 5000, 123), b = sample(s, 5000, 123);
    CHECK(a.counts == b.counts);
    SampleSet c = sample(s, 5000, 124);
    CHECK(a.counts != c.counts);
  }
  SECTION("empirical distribution converges in total variation") {
    Statevector s = qaoa_state(random_maxcut_diag(6, 0.5, 61), random_params(2, 62));
    SampleSet samples = sample(s, 1000000, 63);
    std::vector<double> emp(64, 0.0), exact(64, 0.0);
    for (const auto& [key, c] : samples.counts)
      emp[string_to_index(key)] = static_cast<double>(c) / static_cast<double>(samples.total);
    for (std::size_t k = 0; k < 64; ++k) exact[k] = std::norm(s.amps[k]);
    CHECK(qeopt_test::total_variation(emp, exact) < 0.01);
  }
}

TEST_CASE("analytic gradient matches central differences", "[emulator]") {
  for (int trial = 0; trial < 6; ++trial) {
    CostDiagonal diag = random_maxcut_diag(5, 0.6, 800 + trial);
    QaoaParams params = random_params(2, 900 + trial);
    auto [energy, grad] = qaoa_energy_and_gradient(diag, params);
    CHECK(energy == Catch::Approx(expectation(qaoa_state(diag, params), diag)).margin(1e-12));
    auto numeric = central_diff_gradient(
        [&](const std::vector<double>& v) {
          return expectation(qaoa_state(diag, QaoaParams::from_flat(v)), diag);
        },
        params.flat(), 1e-6);
    for (std::size_t i = 0; i < grad.size(); ++i)
      CHECK(grad[i] == Catch::Approx(numeric[i]).margin(1e-5));
  }
}

TEST_CASE("optimize_params contracts", "[emulator]") {
  SECTION("constant objective: any parameters are optimal") {
    CostDiagonal flat;
    flat.n = 3;
    flat.values.assign(8, 2.5);
    flat.finalize();
    auto res = optimize_params(flat, 1, 2, 7);
    CHECK(res.energy == Catch::Approx(2.5));
  }
  SECTION("single edge p=1 beats 200 random parameter draws") {
    WeightedGraph edge(2, {{0, 1, 1.0}});
    CostDiagonal diag = maxcut_phase_diagonal(edge);
    auto res = optimize_params(diag, 1, 5, 11);
    Rng rng = make_rng(404);
    std::uniform_real_distribution<double> ug(-kPi, kPi), ub(-kPi / 2, kPi / 2);
    double best_random = 1e100;
    for (int t = 0; t < 200; ++t) {
      QaoaParams p({ug(rng)}, {ub(rng)});
      best_random = std::min(best_random, expectation(qaoa_state(diag, p), diag));
    }
    CHECK(res.energy <= best_random + 1e-9);
    CHECK(res.energy == Catch::Approx(-1.0).margin(1e-6));  // exact ground state is reachable at p=1
  }
  SECTION("p=2 is at least as good as p=1 (zero-padding nesting)") {
    WeightedGraph g = make_random_regular(8, 3, 19);  // triangle-free not required for nesting
    CostDiagonal diag = maxcut_phase_diagonal(g);
    auto r1 = optimize_params(diag, 1, 5, 23);
    auto r2 = optimize_params(diag, 2, 5, 23);
    CHECK(ar_star(r2.energy, diag) >= ar_star(r1.energy, diag) - 1e-9);
  }
  SECTION("optimum on a fine p=1 grid never beats the optimizer by much") {
    CostDiagonal diag = random_maxcut_diag(5, 0.6, 71);
    auto res = optimize_params(diag, 1, 5, 29);
    double grid_best = 1e100;
    for (int i = 0; i <= 60; ++i)
      for (int j = 0; j <= 30; ++j) {
        QaoaParams p({-kPi + 2 * kPi * i / 60.0}, {-kPi / 2 + kPi * j / 30.0});
        grid_best = std::min(grid_best, expectation(qaoa_state(diag, p), diag));
      }
    CHECK(res.energy <= grid_best + 0.05);  // grid resolution bound
  }
}

TEST_CASE("readout noise injection", "[emulator]") {
  SampleSet zeros;
  zeros.n = 4;
  zeros.add("0000", 20000);
  SECTION("zero rates are the identity") {
    SampleSet out = inject_readout_noise(zeros, std::vector<std::pair<double, double>>(4, {0.0, 0.0}), 3);
    CHECK(out.counts == zeros.counts);
  }
  SECTION("p=1 flips everything") {
    SampleSet tiny;
    tiny.n = 2;
    tiny.add("00", 10);
    SampleSet out = inject_readout_noise(tiny, {{1.0, 0.0}, {1.0, 0.0}}, 4);
    REQUIRE(out.counts.size() == 1);
    CHECK(out.counts.at("11") == 10);
  }
  SECTION("flip fraction within five sigma of the rate") {
    SampleSet big;
    big.n = 4;
    big.add("0000", 100000);
    SampleSet out = inject_readout_noise(big, std::vector<std::pair<double, double>>(4, {0.1, 0.1}), 5);
    double sigma = std::sqrt(0.1 * 0.9 / 100000.0);
    for (int bit = 0; bit < 4; ++bit) {
      long long ones = 0;
      for (const auto& [key, c] : out.counts)
        if (key[static_cast<std::size_t>(bit)] == '1') ones += c;
      CHECK(std::fabs(static_cast<double>(ones) / 100000.0 - 0.1) < 5.0 * sigma);
    }
  }
}

TEST_CASE("emulation cap is enforced", "[emulator]") {
  CostDiagonal diag = random_maxcut_diag(5, 0.5, 81);
  CHECK_THROWS_AS(qaoa_state(diag, QaoaParams({0.1}, {0.1}), 4), std::invalid_argument);
}
