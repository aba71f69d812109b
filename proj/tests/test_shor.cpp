// Copyright 2026 The shorlev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "shorlev/shor.hpp"
#include "shorlev/synth.hpp"
#include "support.hpp"

namespace {

using namespace shorlev;

struct Built {
  FactoringInstance inst;
  Orbit orbit;
  OperatorSet ops;
};

Built build(u64 N, u64 a, unsigned m, unsigned trnc = 0) {
  const auto inst = FactoringInstance::make(N, a, m);
  const auto orbit = build_orbit(inst);
  return {inst, orbit, synth_all_powers(orbit, m, trnc)};
}

double total(const PhaseDistribution& d) {
  return std::accumulate(d.probabilities.begin(), d.probabilities.end(), 0.0);
}

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

TEST(ControlImage, Examples) {
  const auto b = build(21, 2, 5);
  EXPECT_EQ(control_image(b.ops, 5), 11u);
  EXPECT_EQ(control_image(b.ops, 9), 8u);
  EXPECT_EQ(control_image(b.ops, 0), 1u);
}

TEST(ControlImage, UntruncatedFollowsOrbit) {
  for (const auto& w : support::worked_instances()) {
    const auto b = build(w.N, w.a, w.m);
    for (u64 k = 0; k < b.inst.M(); ++k)
      ASSERT_EQ(control_image(b.ops, k), oracle::naive_pow(w.a, k, w.N))
          << "N=" << w.N << " k=" << k;
  }
}

TEST(ExactDistribution, NormalizedForEveryTruncation) {
  for (const auto& w : support::worked_instances()) {
    const auto inst = FactoringInstance::make(w.N, w.a, w.m);
    const auto orbit = build_orbit(inst);
    for (unsigned t : {0u, 1u, static_cast<unsigned>(orbit.period() / 2),
                       static_cast<unsigned>(orbit.period() - 1)}) {
      const auto d = exact_distribution(inst, synth_all_powers(orbit, w.m, t));
      EXPECT_NEAR(total(d), 1.0, 1e-12) << "N=" << w.N << " trnc=" << t;
      for (double p : d.probabilities) EXPECT_GE(p, 0.0);
    }
  }
}

TEST(ExactDistribution, DegenerateWhenPeriodDividesM) {
  const auto b = build(15, 2, 5);
  ASSERT_EQ(b.orbit.period(), 4u);
  const auto d = exact_distribution(b.inst, b.ops);
  for (u64 l = 0; l < 32; ++l) {
    const double want = (l % 8 == 0) ? 0.25 : 0.0;
    EXPECT_NEAR(d.probabilities[l], want, 1e-12) << "l=" << l;
  }
}

TEST(ExactDistribution, MatchesEigenphaseSum) {
  for (const auto& w : support::worked_instances()) {
    const auto b = build(w.N, w.a, w.m);
    const u64 r = b.orbit.period(), M = b.inst.M();
    const auto d = exact_distribution(b.inst, b.ops);
    for (u64 l = 0; l < M; ++l) {
      double sum = 0.0;
      for (u64 s = 0; s < r; ++s) sum += std::norm(analytic_amplitude(s, r, l, M));
      ASSERT_NEAR(d.probabilities[l], sum, 1e-9) << "N=" << w.N << " l=" << l;
    }
  }
}

TEST(ExactDistribution, MatchesTermByTermSums) {
  // Small instances only: both oracles are quadratic in M.
  for (const auto& [N, a, m] :
       std::vector<support::InstanceSpec>{{21, 2, 5}, {33, 7, 6}, {35, 4, 6}}) {
    const auto b = build(N, a, m);
    const auto d = exact_distribution(b.inst, b.ops);
    EXPECT_LT(max_abs_diff(d.probabilities, oracle::eigenphase_distribution(
                                                b.orbit.period(), b.inst.M())),
              1e-9);
    std::vector<u64> image;
    for (u64 k = 0; k < b.inst.M(); ++k)
      image.push_back(oracle::naive_pow(a, k, N));
    EXPECT_LT(max_abs_diff(d.probabilities, oracle::direct_distribution(image)),
              1e-9);
  }
}

TEST(ExactDistribution, TruncatedMatchesDirectSum) {
  const auto inst = FactoringInstance::make(21, 2, 5);
  const auto orbit = build_orbit(inst);
  for (unsigned t = 0; t < 6; ++t) {
    const auto ops = synth_all_powers(orbit, 5, t);
    std::vector<u64> image;
    for (u64 k = 0; k < 32; ++k) image.push_back(control_image(ops, k));
    EXPECT_LT(max_abs_diff(exact_distribution(inst, ops).probabilities,
                           oracle::direct_distribution(image)),
              1e-9)
        << "trnc=" << t;
  }
}

TEST(ExactDistribution, TwentyOneHasPeakAtFive) {
  const auto b = build(21, 2, 5);
  const auto d = exact_distribution(b.inst, b.ops);
  // 466 of 4096 shots landed on l = 5; one sampling sigma is about 0.005.
  EXPECT_NEAR(d.probabilities[5], 466.0 / 4096.0, 0.005);
  // 5, 11, 21 and 27 all sit a third of a bin from s / 6.
  for (u64 l : {11u, 21u, 27u})
    EXPECT_NEAR(d.probabilities[l], d.probabilities[5], 1e-12);
  // l = 0 and l = 16 are exact eigenphases.
  for (u64 l = 1; l < 32; ++l) {
    if (l == 5 || l == 11 || l == 16 || l == 21 || l == 27) continue;
    EXPECT_LT(d.probabilities[l], d.probabilities[5]) << l;
  }
}

TEST(ExactDistribution, LargestPeaksSitNearEigenphases) {
  for (const auto& w : support::worked_instances()) {
    const auto b = build(w.N, w.a, w.m);
    const u64 r = b.orbit.period(), M = b.inst.M();
    const auto d = exact_distribution(b.inst, b.ops);
    std::vector<u64> order(M);
    std::iota(order.begin(), order.end(), u64{0});
    std::stable_sort(order.begin(), order.end(), [&](u64 x, u64 y) {
      return d.probabilities[x] > d.probabilities[y];
    });
    std::set<u64> top(order.begin(), order.begin() + static_cast<long>(r));
    std::set<u64> want;
    for (u64 s = 0; s < r; ++s)
      want.insert(static_cast<u64>(std::llround(static_cast<double>(M * s) /
                                                static_cast<double>(r))) % M);
    EXPECT_EQ(top, want) << "N=" << w.N;
  }
}

TEST(ExactDistribution, IdentityOperatorGivesPointMass) {
  const auto inst = FactoringInstance::make(21, 2, 1);
  OperatorSet ops{std::make_shared<const LeveledCircuit>(
      inst.n, 1, std::vector<Level>{})};
  const auto d = exact_distribution(inst, ops);
  EXPECT_NEAR(d.probabilities[0], 1.0, 1e-12);
  EXPECT_NEAR(d.probabilities[1], 0.0, 1e-12);
  const auto dense = run_shor_dense(inst, ops);
  EXPECT_NEAR(dense.probabilities[0], 1.0, 1e-12);
}

TEST(ExactDistribution, RejectsMissingOperators) {
  const auto b = build(21, 2, 5);
  OperatorSet few(b.ops.begin(), b.ops.begin() + 3);
  EXPECT_THROW(exact_distribution(b.inst, few), ValidationError);
}

TEST(AnalyticAmplitude, Examples) {
  EXPECT_NEAR(std::abs(analytic_amplitude(1, 4, 8, 32)), 0.5, 1e-12);
  for (u64 r : {2u, 6u, 20u})
    EXPECT_NEAR(std::abs(analytic_amplitude(0, r, 0, 64)),
                1.0 / std::sqrt(static_cast<double>(r)), 1e-12);
  // Dominant term of P(5) for N=21: s=1 of r=6.
  const double a5 = std::norm(analytic_amplitude(1, 6, 5, 32));
  const auto b = build(21, 2, 5);
  EXPECT_GT(a5, 0.10);
  EXPECT_LE(a5, exact_distribution(b.inst, b.ops).probabilities[5]);
  EXPECT_THROW(analytic_amplitude(1, 6, 32, 32), ValidationError);
}

TEST(AnalyticAmplitude, MatchesGeometricSum) {
  support::Gen gen(5);
  for (int i = 0; i < 300; ++i) {
    const u64 M = u64{1} << gen.uniform(1, 8);
    const u64 r = gen.uniform(1, 40);
    const u64 s = gen.uniform(0, r - 1);
    const u64 l = gen.uniform(0, M - 1);
    std::complex<double> acc = 0.0;
    for (u64 k = 0; k < M; ++k) {
      const double x = static_cast<double>(k) *
                       (static_cast<double>(s) / r - static_cast<double>(l) / M);
      acc += std::polar(1.0, 2.0 * std::numbers::pi * (x - std::floor(x)));
    }
    acc /= static_cast<double>(M) * std::sqrt(static_cast<double>(r));
    EXPECT_NEAR(std::abs(analytic_amplitude(s, r, l, M) - acc), 0.0, 1e-9)
        << "s=" << s << " r=" << r << " l=" << l << " M=" << M;
  }
}

TEST(DenseBackend, MatchesFastPath) {
  for (const auto& [N, a, m] :
       std::vector<support::InstanceSpec>{{21, 2, 5}, {33, 7, 6}, {15, 2, 5}}) {
    const auto inst = FactoringInstance::make(N, a, m);
    const auto orbit = build_orbit(inst);
    for (unsigned t : {0u, 2u}) {
      const auto ops = synth_all_powers(orbit, m, t);
      EXPECT_LT(max_abs_diff(exact_distribution(inst, ops).probabilities,
                             run_shor_dense(inst, ops).probabilities),
                1e-9)
          << "N=" << N << " trnc=" << t;
    }
  }
}

TEST(DenseBackend, RefusesLargeRegisters) {
  const auto wide = build(143, 5, 15);
  EXPECT_THROW(run_shor_dense(wide.inst, wide.ops), TooLarge);
  const auto b = build(21, 2, 5);
  EXPECT_THROW(run_shor_dense(b.inst, b.ops, 9), TooLarge);
}

TEST(Eigenstates, ZeroIndexIsUniformOverOrbit) {
  const auto b = build(21, 2, 5);
  const auto u0 = eigenstate_vector(b.orbit, 0);
  const double c = 1.0 / std::sqrt(6.0);
  for (u64 w = 0; w < u0.size(); ++w) {
    const bool on = b.orbit.index_of(w).has_value();
    EXPECT_NEAR(std::abs(u0[w] - std::complex<double>(on ? c : 0.0, 0.0)), 0.0,
                1e-12);
  }
}

TEST(Eigenstates, AreEigenvectorsOfU) {
  for (const auto& w : support::worked_instances()) {
    const auto b = build(w.N, w.a, w.m);
    const u64 r = b.orbit.period();
    for (u64 s = 0; s < r; ++s) {
      const auto u = eigenstate_vector(b.orbit, s);
      const auto Uu = apply_to_statevector(*b.ops[0], u);
      const auto lambda = std::polar(
          1.0, 2.0 * std::numbers::pi * static_cast<double>(s) / r);
      double worst = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs(Uu[i] - lambda * u[i]));
      ASSERT_LT(worst, 1e-9) << "N=" << w.N << " s=" << s;
    }
  }
}

TEST(Eigenstates, SumToWorkStateOne) {
  for (const auto& w : support::worked_instances()) {
    const auto b = build(w.N, w.a, w.m);
    const u64 r = b.orbit.period();
    std::vector<Amplitude> acc(std::size_t{1} << b.inst.n);
    for (u64 s = 0; s < r; ++s) {
      const auto u = eigenstate_vector(b.orbit, s);
      for (std::size_t i = 0; i < u.size(); ++i) acc[i] += u[i];
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(r));
    for (std::size_t i = 0; i < acc.size(); ++i)
      ASSERT_NEAR(std::abs(scale * acc[i] - (i == 1 ? 1.0 : 0.0)), 0.0, 1e-9)
          << "N=" << w.N << " i=" << i;
  }
  const auto b = build(21, 2, 5);
  EXPECT_THROW(eigenstate_vector(b.orbit, 6), ValidationError);
}

TEST(Sampling, UniformWithinFiveSigma) {
  PhaseDistribution u;
  u.m = 2;
  u.probabilities = {0.25, 0.25, 0.25, 0.25};
  const auto s = sample(u, 4096, 99);
  EXPECT_EQ(s.provenance, PhaseDistribution::Provenance::Sampled);
  EXPECT_EQ(std::accumulate(s.counts.begin(), s.counts.end(), u64{0}), 4096u);
  const double sigma = std::sqrt(4096 * 0.25 * 0.75);
  for (u64 c : s.counts) EXPECT_LT(std::abs(static_cast<double>(c) - 1024.0), 5 * sigma);
}

TEST(Sampling, PointMass) {
  PhaseDistribution d;
  d.m = 3;
  d.probabilities.assign(8, 0.0);
  d.probabilities[0] = 1.0;
  const auto s = sample(d, 500, 1);
  EXPECT_EQ(s.counts[0], 500u);
}

TEST(Sampling, TwentyOneCountAtFive) {
  const auto b = build(21, 2, 5);
  const auto exact = exact_distribution(b.inst, b.ops);
  for (u64 seed : {1u, 2u, 3u}) {
    const auto s = sample(exact, 4096, seed);
    const double p = exact.probabilities[5];
    const double sigma = std::sqrt(4096 * p * (1 - p));
    EXPECT_LT(std::abs(static_cast<double>(s.counts[5]) - 4096 * p), 5 * sigma);
    for (u64 l = 0; l < 32; ++l)
      if (exact.probabilities[l] < 1e-14) {
        EXPECT_EQ(s.counts[l], 0u) << l;
      }
  }
}

TEST(Sampling, DeterministicPerSeed) {
  const auto b = build(33, 7, 6);
  const auto exact = exact_distribution(b.inst, b.ops);
  EXPECT_EQ(sample(exact, 1000, 7).counts, sample(exact, 1000, 7).counts);
  EXPECT_NE(sample(exact, 1000, 7).counts, sample(exact, 1000, 8).counts);
  EXPECT_THROW(sample(exact, 0, 7), ValidationError);
}

TEST(HistogramCsv, RowsForNonzeroOutcomes) {
  const auto b = build(21, 2, 5);
  const auto exact = exact_distribution(b.inst, b.ops);
  const auto csv = histogram_csv(b.inst, exact, nullptr, factor_table(b.inst));
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "ell,phase_binary,phase_decimal,probability,counts,produces_factors");
  std::size_t rows = 0;
  bool saw5 = false;
  while (std::getline(is, line)) {
    ++rows;
    if (line.rfind("5,", 0) == 0) {
      saw5 = true;
      EXPECT_EQ(line.substr(0, 14), "5,0.00101,0.15");
      EXPECT_EQ(line.back(), '1');
    }
  }
  EXPECT_TRUE(saw5);
  std::size_t nonzero = 0;
  for (double p : exact.probabilities) nonzero += p > 1e-14;
  EXPECT_EQ(rows, nonzero);
}

TEST(HistogramCsv, DegenerateCaseHasFourRows) {
  const auto b = build(15, 2, 5);
  const auto exact = exact_distribution(b.inst, b.ops);
  const auto csv = histogram_csv(b.inst, exact, nullptr, factor_table(b.inst));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

}  // namespace
