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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shorlev/errors.hpp"

namespace shorlev {

using u64 = std::uint64_t;

/// (a * b) mod N without overflow for any 64-bit operands.
constexpr u64 mul_mod(u64 a, u64 b, u64 N) noexcept {
  return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % N);
}

/// a^x mod N by square-and-multiply. Requires N >= 2.
constexpr u64 mod_pow(u64 a, u64 x, u64 N) noexcept {
  u64 result = 1 % N;
  a %= N;
  while (x > 0) {
    if (x & 1u) result = mul_mod(result, a, N);
    a = mul_mod(a, a, N);
    x >>= 1;
  }
  return result;
}

/// Number of bits needed to hold every value in [0, N): ceil(log2 N).
constexpr unsigned work_width(u64 N) noexcept {
  return static_cast<unsigned>(std::bit_width(N - 1));
}

/// The problem being solved: modulus, base and register widths.
struct FactoringInstance {
  u64 N = 0;
  u64 a = 0;
  unsigned n = 0;  // work qubits
  unsigned m = 0;  // control qubits

  u64 M() const noexcept { return u64{1} << m; }

  /// Validates and builds an instance. `m == 0` selects the full-resolution
  /// width 2n + 1. Throws NotCoprime when a shares a factor with N, and
  /// ValidationError for any other invariant violation.
  static FactoringInstance make(u64 N, u64 a, unsigned m = 0) {
    if (N < 15 || N % 2 == 0)
      throw ValidationError("N must be an odd integer >= 15, got " +
                            std::to_string(N));
    if (N >= (u64{1} << 31))
      throw ValidationError("N must be below 2^31");
    if (a <= 1 || a >= N)
      throw ValidationError("base must satisfy 1 < a < N, got a = " +
                            std::to_string(a));
    if (const u64 g = std::gcd(a, N); g != 1) throw NotCoprime(N, a, g);
    FactoringInstance inst{N, a, work_width(N), m};
    if (inst.m == 0) inst.m = 2 * inst.n + 1;
    if (inst.m > 2 * inst.n + 1)
      throw ValidationError("control width m must satisfy 1 <= m <= 2n + 1 = " +
                            std::to_string(2 * inst.n + 1));
    return inst;
  }

  FactoringInstance with_m(unsigned new_m) const { return make(N, a, new_m); }

  friend bool operator==(const FactoringInstance&,
                         const FactoringInstance&) = default;
};

/// The closed sequence f(0) = 1, f(1) = a, ..., f(r - 1) of the ME function.
struct Orbit {
  FactoringInstance instance;
  std::vector<u64> states;

  std::size_t period() const noexcept { return states.size(); }
  /// f(k mod r).
  u64 at(u64 k) const noexcept { return states[k % states.size()]; }
  /// Position of `value` in the orbit, if present.
  std::optional<std::size_t> index_of(u64 value) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == value) return i;
    return std::nullopt;
  }
};

/// Iterates f(x + 1) = a f(x) mod N from f(0) = 1 until 1 recurs.
inline Orbit build_orbit(const FactoringInstance& inst) {
  if (const u64 g = std::gcd(inst.a, inst.N); g != 1)
    throw NotCoprime(inst.N, inst.a, g);
  Orbit orbit{inst, {1}};
  for (u64 f = inst.a % inst.N; f != 1; f = mul_mod(f, inst.a, inst.N))
    orbit.states.push_back(f);
  return orbit;
}

/// The orbit partitioned into the closed cycles of f(k) -> f(k + p mod r).
struct CycleDecomposition {
  u64 power = 1;
  std::vector<std::vector<u64>> cycles;
};

/// Cycles are emitted in order of their heads, scanning f(0), f(1), ... and
/// starting a new cycle at the first state not yet covered.
inline CycleDecomposition cycle_decomposition(const Orbit& orbit, u64 p) {
  if (p == 0) throw ValidationError("power must be >= 1");
  const std::size_t r = orbit.period();
  const std::size_t step = p % r;
  CycleDecomposition out{p, {}};
  std::vector<bool> covered(r, false);
  for (std::size_t head = 0; head < r; ++head) {
    if (covered[head]) continue;
    std::vector<u64> cycle;
    std::size_t k = head;
    do {
      covered[k] = true;
      cycle.push_back(orbit.states[k]);
      k = (k + step) % r;
    } while (k != head);
    out.cycles.push_back(std::move(cycle));
  }
  return out;
}

/// Continued-fraction coefficients of l / M, leading integer part included.
inline std::vector<u64> continued_fraction(u64 l, u64 M) {
  if (M == 0 || l >= M)
    throw ValidationError("continued_fraction requires 0 <= l < M");
  std::vector<u64> terms;
  u64 num = l, den = M;
  while (den != 0) {
    terms.push_back(num / den);
    num %= den;
    std::swap(num, den);
  }
  return terms;
}

/// A rational s / r; used for convergents and reduced phases.
struct Fraction {
  u64 s = 0;
  u64 r = 1;
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// All convergents h_k / k_k of a continued fraction, starting with the
/// leading term. Each is automatically in lowest terms.
inline std::vector<Fraction> convergents(std::span<const u64> cf) {
  if (cf.empty()) throw ValidationError("convergents of an empty expansion");
  std::vector<Fraction> out;
  out.reserve(cf.size());
  u64 h_prev = 1, h = cf[0];
  u64 k_prev = 0, k = 1;
  out.push_back({h, k});
  for (std::size_t i = 1; i < cf.size(); ++i) {
    const u64 h_next = cf[i] * h + h_prev;
    const u64 k_next = cf[i] * k + k_prev;
    h_prev = std::exchange(h, h_next);
    k_prev = std::exchange(k, k_next);
    out.push_back({h, k});
  }
  return out;
}

enum class PeriodCheck {
  Accepted,
  Odd,        // r is odd
  MinusOne,   // a^{r/2} = -1 (mod N)
  NotPeriod,  // a^r != 1 (mod N)
};

inline const char* to_string(PeriodCheck c) noexcept {
  switch (c) {
    case PeriodCheck::Accepted: return "accepted";
    case PeriodCheck::Odd: return "odd";
    case PeriodCheck::MinusOne: return "minus_one";
    case PeriodCheck::NotPeriod: return "not_period";
  }
  return "?";
}

/// Odd periods are always rejected; there is no perfect-square escape.
inline PeriodCheck check_period(const FactoringInstance& inst, u64 r) {
  if (r == 0) throw ValidationError("candidate period must be >= 1");
  if (r % 2 != 0) return PeriodCheck::Odd;
  if (mod_pow(inst.a, r / 2, inst.N) == inst.N - 1) return PeriodCheck::MinusOne;
  if (mod_pow(inst.a, r, inst.N) != 1) return PeriodCheck::NotPeriod;
  return PeriodCheck::Accepted;
}

struct FactorPair {
  u64 first = 0;   // gcd(a^{r/2} - 1, N)
  u64 second = 0;  // gcd(a^{r/2} + 1, N)
  friend bool operator==(const FactorPair&, const FactorPair&) = default;
};

/// Throws TrivialFactor when either gcd is 1 or N.
inline FactorPair extract_factors(const FactoringInstance& inst, u64 r) {
  const u64 half = mod_pow(inst.a, r / 2, inst.N);
  const FactorPair f{std::gcd((half + inst.N - 1) % inst.N, inst.N),
                     std::gcd(half + 1, inst.N)};
  const auto trivial = [&](u64 g) { return g <= 1 || g >= inst.N; };
  if (trivial(f.first) || trivial(f.second))
    throw TrivialFactor("period " + std::to_string(r) +
                        " yields only trivial factors of " +
                        std::to_string(inst.N));
  return f;
}

/// Outcome of testing one convergent denominator.
struct ConvergentVerdict {
  enum class Kind { RejectedOdd, RejectedCheck, RejectedTrivial, Factors };

  Fraction convergent;
  Kind kind = Kind::RejectedCheck;
  PeriodCheck check = PeriodCheck::Accepted;
  std::optional<FactorPair> factors;
};

/// Continued-fractions analysis of a single control-register measurement.
struct ConvergentReport {
  u64 l_measured = 0;
  unsigned m = 0;
  std::string phase_binary;  // "0.l_{m-1}...l_0"
  Fraction phase_fraction;   // l / M in lowest terms
  std::vector<u64> cf_terms;
  std::vector<Fraction> convergents;
  std::vector<ConvergentVerdict> verdicts;

  u64 M() const noexcept { return u64{1} << m; }
  double phase_decimal() const noexcept {
    return static_cast<double>(l_measured) / static_cast<double>(M());
  }
  /// Factors from the first convergent that produced any.
  std::optional<FactorPair> factors() const {
    for (const auto& v : verdicts)
      if (v.factors) return v.factors;
    return std::nullopt;
  }
  bool produces_factors() const { return factors().has_value(); }
};

/// The m-bit binary expansion "0.b_{m-1}...b_0" of l / 2^m.
inline std::string phase_binary(u64 l, unsigned m) {
  std::string s = "0.";
  for (unsigned i = m; i-- > 0;) s.push_back(((l >> i) & 1u) ? '1' : '0');
  return s;
}

/// Every convergent denominator is tested; nothing short-circuits after the
/// first success.
inline ConvergentReport analyze_measurement(const FactoringInstance& inst,
                                            u64 l) {
  const u64 M = inst.M();
  if (l >= M)
    throw ValidationError("measured value " + std::to_string(l) +
                          " outside [0, " + std::to_string(M) + ")");
  ConvergentReport rep;
  rep.l_measured = l;
  rep.m = inst.m;
  rep.phase_binary = phase_binary(l, inst.m);
  const u64 g = std::gcd(l, M);
  rep.phase_fraction = {l / g, M / g};
  rep.cf_terms = continued_fraction(l, M);
  rep.convergents = convergents(rep.cf_terms);
  using Kind = ConvergentVerdict::Kind;
  for (const Fraction& c : rep.convergents) {
    ConvergentVerdict v;
    v.convergent = c;
    v.check = check_period(inst, c.r);
    if (v.check == PeriodCheck::Odd) {
      v.kind = Kind::RejectedOdd;
    } else if (v.check != PeriodCheck::Accepted) {
      v.kind = Kind::RejectedCheck;
    } else {
      try {
        v.factors = extract_factors(inst, c.r);
        v.kind = Kind::Factors;
      } catch (const TrivialFactor&) {
        v.kind = Kind::RejectedTrivial;
      }
    }
    rep.verdicts.push_back(v);
  }
  return rep;
}

/// Factor-producing flag for every outcome l in [0, M).
inline std::vector<bool> factor_table(const FactoringInstance& inst) {
  std::vector<bool> table(inst.M());
  for (u64 l = 0; l < inst.M(); ++l)
    table[l] = analyze_measurement(inst, l).produces_factors();
  return table;
}

}  // namespace shorlev
