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

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shorlev/modmath.hpp"
#include "shorlev/report.hpp"
#include "shorlev/shor.hpp"
#include "shorlev/synth.hpp"

namespace shorlev {

inline constexpr u64 kDefaultMaxTries = 500;

/// splitmix64 finalizer.
constexpr u64 mix64(u64 x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Per-iteration seed: mix64(mix64(mix64(base) ^ trnc_lv) ^ iteration).
/// Part of the output compatibility contract; do not change.
constexpr u64 derive_seed(u64 base_seed, u64 trnc_lv, u64 iteration) noexcept {
  return mix64(mix64(mix64(base_seed) ^ trnc_lv) ^ iteration);
}

struct TriesOutcome {
  u64 tries = 0;
  bool capped = false;
};

/// Draws outcomes until one is factor-producing. `produces_factors[l]` must
/// equal analyze_measurement(inst, l).produces_factors().
inline TriesOutcome tries_until_factor(const PhaseDistribution& exact,
                                       const std::vector<bool>& produces_factors,
                                       u64 seed, u64 max_tries = kDefaultMaxTries) {
  if (max_tries == 0) throw ValidationError("max_tries must be >= 1");
  PhaseSampler sampler(exact, seed);
  for (u64 t = 1; t <= max_tries; ++t)
    if (produces_factors[sampler.draw()]) return {t, false};
  return {max_tries, true};
}

inline TriesOutcome tries_until_factor(const FactoringInstance& inst,
                                       const OperatorSet& ops, u64 seed,
                                       u64 max_tries = kDefaultMaxTries) {
  return tries_until_factor(exact_distribution(inst, ops), factor_table(inst),
                            seed, max_tries);
}

/// Ensemble of tries at one truncation level.
struct TriesResult {
  FactoringInstance instance;
  u64 r = 0;
  unsigned trnc_lv = 0;
  u64 max_tries = kDefaultMaxTries;
  std::vector<u64> tries;
  std::vector<bool> capped;
  double mean = 0.0;  // capped iterations enter at max_tries

  std::size_t num_it() const noexcept { return tries.size(); }
  double capped_fraction() const noexcept {
    if (capped.empty()) return 0.0;
    const auto c = std::count(capped.begin(), capped.end(), true);
    return static_cast<double>(c) / static_cast<double>(capped.size());
  }
};

/// A factor-producing eigenphase s / r and the factor-producing probability
/// mass within +-1 of l = M s / r.
struct PeakPresence {
  u64 s = 0;
  double mass = 0.0;
  bool present = false;
};

/// Present means the mass exceeds twice the uniform floor 1/M.
inline std::vector<PeakPresence> peak_presence(
    const PhaseDistribution& exact, u64 r,
    const std::vector<bool>& produces_factors) {
  const u64 M = exact.M();
  std::vector<PeakPresence> out;
  for (u64 s = 1; s < r; ++s) {
    if (std::gcd(s, r) != 1) continue;
    PeakPresence p{s};
    // Integers l with |l r - M s| <= r.
    const u64 centre = (M * s) / r;
    for (u64 l = (centre == 0 ? 0 : centre - 1); l <= centre + 2; ++l) {
      const u64 lr = l * r, ms = M * s;
      if ((lr > ms ? lr - ms : ms - lr) > r) continue;
      const u64 idx = l % M;
      if (produces_factors[idx]) p.mass += exact.probabilities[idx];
    }
    p.present = p.mass > 2.0 / static_cast<double>(M);
    out.push_back(p);
  }
  return out;
}

/// One (m, trnc_lv) cell of a study.
struct StudyRow {
  TriesResult tries;
  std::vector<PeakPresence> peaks;

  std::size_t peaks_present() const {
    return static_cast<std::size_t>(std::count_if(
        peaks.begin(), peaks.end(), [](const auto& p) { return p.present; }));
  }
};

inline StudyRow run_study_cell(const Orbit& orbit, unsigned trnc_lv,
                               const std::vector<bool>& produces_factors,
                               u64 num_it, u64 base_seed, u64 max_tries,
                               ControlStrategy controls = ControlStrategy::Full) {
  const FactoringInstance& inst = orbit.instance;
  const auto ops = synth_all_powers(orbit, inst.m, trnc_lv, controls);
  const auto dist = exact_distribution(inst, ops);
  StudyRow row;
  TriesResult& res = row.tries;
  res.instance = inst;
  res.r = orbit.period();
  res.trnc_lv = trnc_lv;
  res.max_tries = max_tries;
  res.tries.resize(num_it);
  res.capped.resize(num_it);
  for (u64 it = 0; it < num_it; ++it) {
    const auto o = tries_until_factor(dist, produces_factors,
                                      derive_seed(base_seed, trnc_lv, it),
                                      max_tries);
    res.tries[it] = o.tries;
    res.capped[it] = o.capped;
  }
  if (num_it > 0)
    res.mean = static_cast<double>(std::accumulate(res.tries.begin(),
                                                   res.tries.end(), u64{0})) /
               static_cast<double>(num_it);
  row.peaks = peak_presence(dist, orbit.period(), produces_factors);
  return row;
}

/// num_it tries per truncation level in [trnc_lo, trnc_hi]; circuits are
/// synthesized once per level.
inline std::vector<TriesResult> truncation_sweep(
    const FactoringInstance& inst, unsigned trnc_lo, unsigned trnc_hi,
    u64 num_it, u64 base_seed, u64 max_tries = kDefaultMaxTries,
    ControlStrategy controls = ControlStrategy::Full) {
  const Orbit orbit = build_orbit(inst);
  if (trnc_lo > trnc_hi || trnc_hi >= orbit.period())
    throw ValidationError("truncation range must lie within [0, r)");
  const auto table = factor_table(inst);
  std::vector<TriesResult> out;
  for (unsigned t = trnc_lo; t <= trnc_hi; ++t)
    out.push_back(
        run_study_cell(orbit, t, table, num_it, base_seed, max_tries, controls)
            .tries);
  return out;
}

/// truncation_sweep for each control width, plus the peak-presence table.
/// Rows are ordered by m (as given) then trnc_lv.
inline std::vector<StudyRow> resolution_study(
    u64 N, u64 a, const std::vector<unsigned>& m_values, unsigned trnc_lo,
    unsigned trnc_hi, u64 num_it, u64 base_seed,
    u64 max_tries = kDefaultMaxTries,
    ControlStrategy controls = ControlStrategy::Full) {
  std::vector<StudyRow> rows;
  for (unsigned m : m_values) {
    const auto inst = FactoringInstance::make(N, a, m);
    const Orbit orbit = build_orbit(inst);
    if (trnc_lo > trnc_hi || trnc_hi >= orbit.period())
      throw ValidationError("truncation range must lie within [0, r)");
    const auto table = factor_table(inst);
    for (unsigned t = trnc_lo; t <= trnc_hi; ++t)
      rows.push_back(run_study_cell(orbit, t, table, num_it, base_seed,
                                    max_tries, controls));
  }
  return rows;
}

/// First truncation level from which every mean in `sweep` exceeds `band`;
/// nullopt if the last level is still within the band. Single noisy
/// excursions above the band do not count.
inline std::optional<unsigned> cliff_level(const std::vector<TriesResult>& sweep,
                                           double band) {
  std::optional<unsigned> cliff;
  for (const auto& t : sweep) {
    if (t.mean <= band)
      cliff.reset();
    else if (!cliff)
      cliff = t.trnc_lv;
  }
  return cliff;
}

/// First truncation level whose mean exceeds `band`.
inline std::optional<unsigned> first_exceedance(
    const std::vector<TriesResult>& sweep, double band) {
  for (const auto& t : sweep)
    if (t.mean > band) return t.trnc_lv;
  return std::nullopt;
}

inline std::string study_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream os;
  os << "N,a,r,n,m,trnc_lv,num_it,mean_tries,capped_fraction\n";
  for (const auto& row : rows) {
    const auto& t = row.tries;
    os << t.instance.N << ',' << t.instance.a << ',' << t.r << ','
       << t.instance.n << ',' << t.instance.m << ',' << t.trnc_lv << ','
       << t.num_it() << ',' << format_decimal(t.mean) << ','
       << format_decimal(t.capped_fraction()) << '\n';
  }
  return os.str();
}

inline nlohmann::json study_json(
    const std::vector<StudyRow>& rows, u64 base_seed,
    ControlStrategy controls = ControlStrategy::Full) {
  using nlohmann::json;
  json out;
  out["base_seed"] = base_seed;
  out["controls"] = to_string(controls);
  out["seed_derivation"] =
      "mix64(mix64(mix64(base_seed) ^ trnc_lv) ^ iteration), mix64 = splitmix64";
  out["mean_note"] = "capped iterations contribute max_tries to mean_tries";
  json jrows = json::array();
  for (const auto& row : rows) {
    const auto& t = row.tries;
    json peaks = json::array();
    for (const auto& p : row.peaks)
      peaks.push_back({{"s", p.s}, {"mass", p.mass}, {"present", p.present}});
    jrows.push_back({{"N", t.instance.N},
                     {"a", t.instance.a},
                     {"r", t.r},
                     {"n", t.instance.n},
                     {"m", t.instance.m},
                     {"trnc_lv", t.trnc_lv},
                     {"num_it", t.num_it()},
                     {"max_tries", t.max_tries},
                     {"mean_tries", t.mean},
                     {"capped_fraction", t.capped_fraction()},
                     {"tries", t.tries},
                     {"capped", t.capped},
                     {"peaks", std::move(peaks)}});
  }
  out["rows"] = std::move(jrows);
  return out;
}

}  // namespace shorlev
