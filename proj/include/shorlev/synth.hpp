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
#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "shorlev/circuit.hpp"
#include "shorlev/errors.hpp"
#include "shorlev/modmath.hpp"

namespace shorlev {

namespace detail {

/// Does the partial pattern {controls of `fire` on `mask`} select `w`?
inline bool pattern_matches(u64 fire, u64 mask, u64 w) noexcept {
  return ((fire ^ w) & mask) == 0;
}

}  // namespace detail

/// Controls for a NOT on `target` that fires on `fire_value` and on none of
/// `forbidden`. Starts from every other qubit (polarity taken from
/// `fire_value`) and drops controls from the highest qubit down, keeping a
/// drop only if no forbidden value becomes selected. Returns nullopt when
/// even the full set cannot separate `fire_value` from a forbidden value,
/// i.e. some forbidden value differs from it in the target bit alone.
inline std::optional<std::vector<Control>> minimize_controls(
    u64 fire_value, std::span<const u64> forbidden, Qubit target,
    unsigned n) {
  const u64 all = (n >= 64 ? ~u64{0} : (u64{1} << n) - 1) & ~(u64{1} << target);
  const auto clashes = [&](u64 mask) {
    return std::any_of(forbidden.begin(), forbidden.end(), [&](u64 w) {
      return detail::pattern_matches(fire_value, mask, w);
    });
  };
  u64 mask = all;
  if (clashes(mask)) return std::nullopt;
  for (unsigned q = n; q-- > 0;) {
    const u64 bit = u64{1} << q;
    if (!(mask & bit)) continue;
    if (!clashes(mask & ~bit)) mask &= ~bit;
  }
  std::vector<Control> controls;
  for (unsigned q = 0; q < n; ++q)
    if (mask & (u64{1} << q))
      controls.push_back({q, ((fire_value >> q) & 1u) == 0});
  return controls;
}

/// How synth_level picks the controls of each bit flip.
///
/// Full conditions every flip on all other qubits, so a level only moves the
/// basis states on its own path. Minimized prunes controls with
/// minimize_controls; the gates then also act on many off-orbit states, which
/// changes how truncated operators behave.
enum class ControlStrategy { Full, Minimized };

inline const char* to_string(ControlStrategy s) noexcept {
  return s == ControlStrategy::Full ? "full" : "minimized";
}

/// All qubits except `target`, polarity taken from `fire_value`.
inline std::vector<Control> full_controls(u64 fire_value, Qubit target,
                                          unsigned n) {
  std::vector<Control> controls;
  for (unsigned q = 0; q < n; ++q)
    if (q != target) controls.push_back({q, ((fire_value >> q) & 1u) == 0});
  return controls;
}

namespace detail {

inline constexpr std::size_t kMaxPathExpansions = std::size_t{1} << 22;

/// Shortest walk current -> target over single bit flips that never visits a
/// protected value. A* on the hypercube with Hamming distance as heuristic;
/// ties go to the deeper node, then to the lower bit, so an unobstructed
/// walk flips the differing bits in ascending order.
inline std::optional<std::vector<Qubit>> flip_path(
    u64 current, u64 target, const std::unordered_set<u64>& blocked,
    unsigned n) {
  struct Node {
    unsigned f;
    unsigned g;
    std::uint64_t seq;
    u64 v;
  };
  const auto worse = [](const Node& a, const Node& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.seq > b.seq;
  };
  const auto h = [&](u64 v) {
    return static_cast<unsigned>(std::popcount(v ^ target));
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  std::unordered_map<u64, std::pair<u64, Qubit>> parent;
  std::unordered_map<u64, unsigned> best;
  std::uint64_t seq = 0;
  open.push({h(current), 0, seq++, current});
  best[current] = 0;
  std::size_t expanded = 0;
  while (!open.empty()) {
    const Node node = open.top();
    open.pop();
    if (node.g != best[node.v]) continue;
    if (node.v == target) {
      std::vector<Qubit> path;
      for (u64 v = target; v != current;) {
        const auto& [prev, bit] = parent.at(v);
        path.push_back(bit);
        v = prev;
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    if (++expanded > kMaxPathExpansions) return std::nullopt;
    for (Qubit q = 0; q < n; ++q) {
      const u64 w = node.v ^ (u64{1} << q);
      if (blocked.count(w)) continue;
      const unsigned g = node.g + 1;
      auto it = best.find(w);
      if (it != best.end() && it->second <= g) continue;
      best[w] = g;
      parent[w] = {node.v, q};
      open.push({g + h(w), g, seq++, w});
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Gates taking `current` to `target` while fixing every protected value.
///
/// The running value follows a shortest chain of single bit flips that avoids
/// the protected set; without obstructions this flips the differing bits in
/// ascending order. Each gate's controls are derived from the running value.
///
/// If no such chain exists (the protected set walls `current` off), the level
/// becomes a transposition network instead: full-control flips along the
/// ascending-bit chain to `target`, then back over all but the last flip.
/// Its net action swaps `current` and `target` and restores every other
/// state, protected ones included.
inline std::vector<Gate> synth_level(
    u64 current, u64 target, std::span<const u64> protected_values, unsigned n,
    ControlStrategy strategy = ControlStrategy::Full) {
  const std::unordered_set<u64> blocked(protected_values.begin(),
                                        protected_values.end());
  if (blocked.count(current) || blocked.count(target))
    throw ValidationError("synth_level: endpoint is a protected value");
  std::vector<Gate> gates;
  u64 v = current;
  if (const auto path = detail::flip_path(current, target, blocked, n)) {
    for (Qubit bit : *path) {
      // Neither v nor v ^ bit is protected, so even the full pattern
      // separates v and minimize_controls cannot come back empty.
      auto controls = strategy == ControlStrategy::Full
                          ? std::optional(full_controls(v, bit, n))
                          : minimize_controls(v, protected_values, bit, n);
      if (!controls)
        throw ProtectedCollision("cannot isolate " + std::to_string(v) +
                                 " from the protected set");
      gates.push_back(Gate::mcx(bit, std::move(*controls)));
      v ^= u64{1} << bit;
    }
    return gates;
  }
  for (Qubit q = 0; q < n; ++q) {
    if (!(((v ^ target) >> q) & 1u)) continue;
    gates.push_back(Gate::mcx(q, full_controls(v, q, n)));
    v ^= u64{1} << q;
  }
  for (std::size_t i = gates.size() - 1; i-- > 0;) gates.push_back(gates[i]);
  return gates;
}

/// Synthesis frontier: where each orbit input currently sits after the levels
/// built so far, and which values later levels must leave alone.
class SynthesisState {
 public:
  explicit SynthesisState(std::span<const u64> inputs) {
    for (u64 w : inputs) trajectories_.emplace(w, w);
  }

  u64 trajectory(u64 input) const { return trajectories_.at(input); }
  const std::map<u64, u64>& trajectories() const noexcept {
    return trajectories_;
  }
  const std::vector<u64>& protected_values() const noexcept {
    return protected_;
  }
  std::size_t level_index() const noexcept { return level_; }

  void advance(std::span<const Gate> gates) {
    for (auto& [input, value] : trajectories_)
      for (const auto& g : gates) value = g.apply(value);
  }

  /// Closes the current level: `input` has reached its target, which from
  /// now on is protected.
  void seal(u64 input) {
    protected_.push_back(trajectory(input));
    ++level_;
  }

 private:
  std::map<u64, u64> trajectories_;
  std::vector<u64> protected_;
  std::size_t level_ = 0;
};

/// One transition src -> dst per level, in cycle-decomposition order.
struct Transition {
  u64 source = 0;
  u64 target = 0;
};

inline std::vector<Transition> level_transitions(const CycleDecomposition& cd) {
  std::vector<Transition> out;
  for (const auto& cycle : cd.cycles)
    for (std::size_t i = 0; i < cycle.size(); ++i)
      out.push_back({cycle[i], cycle[(i + 1) % cycle.size()]});
  return out;
}

/// Builds U^p on the orbit level by level, then empties the last `trnc_lv`
/// levels.
inline LeveledCircuit synth_me_operator(
    const Orbit& orbit, u64 p, unsigned trnc_lv = 0,
    ControlStrategy strategy = ControlStrategy::Full) {
  const std::size_t r = orbit.period();
  if (trnc_lv >= r)
    throw ValidationError("trnc_lv must be below the period " +
                          std::to_string(r));
  const unsigned n = orbit.instance.n;
  const auto transitions = level_transitions(cycle_decomposition(orbit, p));

  SynthesisState state(orbit.states);
  std::vector<Level> levels;
  levels.reserve(r);
  for (const auto& t : transitions) {
    auto gates = synth_level(state.trajectory(t.source), t.target,
                             state.protected_values(), n, strategy);
    state.advance(gates);
    if (state.trajectory(t.source) != t.target)
      throw ProtectedCollision("prefix invariant broken at level " +
                               std::to_string(state.level_index()));
    state.seal(t.source);
    levels.push_back(std::move(gates));
  }
  for (std::size_t x = r - trnc_lv; x < r; ++x) levels[x].clear();
  return LeveledCircuit(n, p, std::move(levels), trnc_lv,
                        trnc_lv == 0 ? CircuitVersion::PerPower
                                     : CircuitVersion::Truncated);
}

/// U^{2^q} for q = 0 .. m-1; index q holds the operator for power 2^q.
using OperatorSet = std::vector<std::shared_ptr<const LeveledCircuit>>;

/// Powers congruent mod r act identically on the orbit and share one object.
inline OperatorSet synth_all_powers(
    const Orbit& orbit, unsigned m, unsigned trnc_lv = 0,
    ControlStrategy strategy = ControlStrategy::Full) {
  if (m == 0 || m > 62) throw ValidationError("m must be in [1, 62]");
  const u64 r = orbit.period();
  OperatorSet ops;
  std::map<u64, std::shared_ptr<const LeveledCircuit>> by_residue;
  for (unsigned q = 0; q < m; ++q) {
    const u64 p = u64{1} << q;
    auto& slot = by_residue[p % r];
    if (!slot)
      slot = std::make_shared<const LeveledCircuit>(
          synth_me_operator(orbit, p, trnc_lv, strategy));
    ops.push_back(slot);
  }
  return ops;
}

/// Distinct operator objects in an OperatorSet, in first-use order.
inline std::size_t distinct_operators(const OperatorSet& ops) {
  std::vector<const LeveledCircuit*> seen;
  for (const auto& op : ops)
    if (std::find(seen.begin(), seen.end(), op.get()) == seen.end())
      seen.push_back(op.get());
  return seen.size();
}

}  // namespace shorlev
