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
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shorlev/errors.hpp"
#include "shorlev/modmath.hpp"

namespace shorlev {

/// Qubit k carries bit k of a basis integer (qubit 0 is the least significant
/// bit, OpenQASM/Qiskit order).
using Qubit = unsigned;

struct Control {
  Qubit qubit = 0;
  bool negative = false;  // fires on 0 instead of 1
  friend bool operator==(const Control&, const Control&) = default;
};

/// A NOT on `target`, conditioned on every control matching its polarity.
/// With no controls it is a plain X.
class Gate {
 public:
  Gate() = default;

  static Gate x(Qubit target) { return Gate(target, {}); }
  static Gate mcx(Qubit target, std::vector<Control> controls) {
    return Gate(target, std::move(controls));
  }

  Qubit target() const noexcept { return target_; }
  const std::vector<Control>& controls() const noexcept { return controls_; }
  bool is_not() const noexcept { return controls_.empty(); }

  /// Highest qubit index touched by the gate.
  Qubit max_qubit() const noexcept {
    Qubit q = target_;
    for (const auto& c : controls_) q = std::max(q, c.qubit);
    return q;
  }

  bool fires_on(u64 w) const noexcept {
    return (w & pos_mask_) == pos_mask_ && (w & neg_mask_) == 0;
  }
  u64 apply(u64 w) const noexcept {
    return fires_on(w) ? w ^ (u64{1} << target_) : w;
  }

  friend bool operator==(const Gate& a, const Gate& b) {
    return a.target_ == b.target_ && a.controls_ == b.controls_;
  }

 private:
  Gate(Qubit target, std::vector<Control> controls)
      : target_(target), controls_(std::move(controls)) {
    if (target_ >= 63) throw ValidationError("qubit index out of range");
    for (const auto& c : controls_) {
      if (c.qubit >= 63) throw ValidationError("qubit index out of range");
      if (c.qubit == target_)
        throw ValidationError("gate target " + std::to_string(target_) +
                              " also used as a control");
      const u64 bit = u64{1} << c.qubit;
      if ((pos_mask_ | neg_mask_) & bit)
        throw ValidationError("duplicate control qubit " +
                              std::to_string(c.qubit));
      (c.negative ? neg_mask_ : pos_mask_) |= bit;
    }
  }

  Qubit target_ = 0;
  std::vector<Control> controls_;
  u64 pos_mask_ = 0;
  u64 neg_mask_ = 0;
};

using Level = std::vector<Gate>;

/// u_ver 0 / 1 / 2.
enum class CircuitVersion { Concatenated, PerPower, Truncated };

inline const char* to_string(CircuitVersion v) noexcept {
  switch (v) {
    case CircuitVersion::Concatenated: return "concatenated";
    case CircuitVersion::PerPower: return "per_power";
    case CircuitVersion::Truncated: return "truncated";
  }
  return "?";
}

/// An ME operator U^p as an ordered list of levels. Immutable once built.
class LeveledCircuit {
 public:
  LeveledCircuit(unsigned n_qubits, u64 power, std::vector<Level> levels,
                 unsigned trnc_lv = 0,
                 CircuitVersion version = CircuitVersion::PerPower)
      : n_qubits_(n_qubits),
        power_(power),
        trnc_lv_(trnc_lv),
        version_(version),
        levels_(std::move(levels)) {
    if (n_qubits_ == 0 || n_qubits_ > 62)
      throw ValidationError("n_qubits must be in [1, 62]");
    if (trnc_lv_ > levels_.size())
      throw ValidationError("trnc_lv exceeds the number of levels");
    for (std::size_t x = 0; x < levels_.size(); ++x) {
      for (const auto& g : levels_[x])
        if (g.max_qubit() >= n_qubits_)
          throw ValidationError("gate touches qubit " +
                                std::to_string(g.max_qubit()) +
                                " of a " + std::to_string(n_qubits_) +
                                "-qubit circuit");
      if (x + trnc_lv_ >= levels_.size() && !levels_[x].empty())
        throw ValidationError("truncated level " + std::to_string(x) +
                              " is not empty");
    }
  }

  unsigned n_qubits() const noexcept { return n_qubits_; }
  u64 power() const noexcept { return power_; }
  unsigned trnc_lv() const noexcept { return trnc_lv_; }
  CircuitVersion version() const noexcept { return version_; }
  const std::vector<Level>& levels() const noexcept { return levels_; }

  std::size_t gate_count() const noexcept {
    std::size_t total = 0;
    for (const auto& l : levels_) total += l.size();
    return total;
  }

 private:
  unsigned n_qubits_;
  u64 power_;
  unsigned trnc_lv_;
  CircuitVersion version_;
  std::vector<Level> levels_;
};

/// Evaluates the gates level by level, left to right.
inline u64 apply_to_basis(const LeveledCircuit& c, u64 w) {
  for (const auto& level : c.levels())
    for (const auto& g : level) w = g.apply(w);
  return w;
}

using Amplitude = std::complex<double>;

/// Linear extension of apply_to_basis; each gate swaps amplitude pairs.
inline std::vector<Amplitude> apply_to_statevector(
    const LeveledCircuit& c, std::span<const Amplitude> state) {
  const std::size_t dim = std::size_t{1} << c.n_qubits();
  if (state.size() != dim)
    throw DimensionMismatch("state has " + std::to_string(state.size()) +
                            " amplitudes, circuit needs " +
                            std::to_string(dim));
  std::vector<Amplitude> out(state.begin(), state.end());
  for (const auto& level : c.levels()) {
    for (const auto& g : level) {
      const std::size_t bit = std::size_t{1} << g.target();
      for (std::size_t i = 0; i < dim; ++i)
        if (!(i & bit) && g.fires_on(i)) std::swap(out[i], out[i | bit]);
    }
  }
  return out;
}

/// image[i] = apply_to_basis(circuit, domain[i]).
struct PermutationTable {
  std::vector<u64> domain;
  std::vector<u64> image;
  friend bool operator==(const PermutationTable&,
                         const PermutationTable&) = default;
};

inline PermutationTable permutation_table(const LeveledCircuit& c,
                                          std::span<const u64> domain) {
  PermutationTable t{{domain.begin(), domain.end()}, {}};
  t.image.reserve(domain.size());
  for (u64 w : domain) t.image.push_back(apply_to_basis(c, w));
  return t;
}

/// [0, 2^n_qubits).
inline std::vector<u64> full_domain(unsigned n_qubits) {
  std::vector<u64> d(std::size_t{1} << n_qubits);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = i;
  return d;
}

/// U^p as p back-to-back copies of U (u_ver 0). Only meant as an oracle.
inline LeveledCircuit concatenate_power(const LeveledCircuit& u, u64 p) {
  if (p == 0) throw ValidationError("power must be >= 1");
  if (p == 1) return u;
  std::vector<Level> levels;
  levels.reserve(u.levels().size() * p);
  for (u64 i = 0; i < p; ++i)
    levels.insert(levels.end(), u.levels().begin(), u.levels().end());
  return LeveledCircuit(u.n_qubits(), u.power() * p, std::move(levels), 0,
                        CircuitVersion::Concatenated);
}

/// True iff both circuits act identically on `domain`.
inline bool restricted_equal(const LeveledCircuit& c1, const LeveledCircuit& c2,
                             std::span<const u64> domain) {
  if (c1.n_qubits() != c2.n_qubits())
    throw ValidationError("restricted_equal on circuits of different width");
  return std::all_of(domain.begin(), domain.end(), [&](u64 w) {
    return apply_to_basis(c1, w) == apply_to_basis(c2, w);
  });
}

/// Rewrites every negative control as X - positive control - X, leaving a
/// circuit whose gates carry positive controls only. Level boundaries are kept.
inline LeveledCircuit lower_negative_controls(const LeveledCircuit& c) {
  std::vector<Level> levels;
  levels.reserve(c.levels().size());
  for (const auto& level : c.levels()) {
    Level out;
    for (const auto& g : level) {
      std::vector<Control> positive;
      std::vector<Qubit> flipped;
      for (const auto& ctl : g.controls()) {
        positive.push_back({ctl.qubit, false});
        if (ctl.negative) flipped.push_back(ctl.qubit);
      }
      for (Qubit q : flipped) out.push_back(Gate::x(q));
      out.push_back(Gate::mcx(g.target(), std::move(positive)));
      for (Qubit q : flipped) out.push_back(Gate::x(q));
    }
    levels.push_back(std::move(out));
  }
  return LeveledCircuit(c.n_qubits(), c.power(), std::move(levels),
                        c.trnc_lv(), c.version());
}

}  // namespace shorlev
