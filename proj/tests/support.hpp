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

#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "shorlev/shorlev.hpp"

namespace support {

using shorlev::u64;

struct InstanceSpec {
  u64 N;
  u64 a;
  unsigned m;
};

/// The four worked instances, with the control widths used for them.
inline const std::vector<InstanceSpec>& worked_instances() {
  static const std::vector<InstanceSpec> v{
      {21, 2, 5}, {33, 7, 6}, {143, 5, 10}, {247, 2, 10}};
  return v;
}

/// Small hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(u64 seed) : rng_(seed) {}

  u64 uniform(u64 lo, u64 hi) {
    return std::uniform_int_distribution<u64>(lo, hi)(rng_);
  }
  bool coin() { return uniform(0, 1) == 1; }

  shorlev::Gate gate(unsigned n) {
    const auto target = static_cast<shorlev::Qubit>(uniform(0, n - 1));
    std::vector<shorlev::Control> controls;
    for (unsigned q = 0; q < n; ++q)
      if (q != target && uniform(0, 2) == 0)
        controls.push_back({q, coin()});
    if (controls.empty() && coin()) return shorlev::Gate::x(target);
    return shorlev::Gate::mcx(target, std::move(controls));
  }

  shorlev::LeveledCircuit circuit(unsigned n, std::size_t levels,
                                  std::size_t max_gates) {
    std::vector<shorlev::Level> ls(levels);
    for (auto& l : ls) {
      const u64 count = uniform(0, max_gates);
      for (u64 i = 0; i < count; ++i) l.push_back(gate(n));
    }
    return shorlev::LeveledCircuit(n, 1, std::move(ls));
  }

  /// Odd composite N in [15, hi] with a coprime base 1 < a < N.
  std::pair<u64, u64> instance(u64 hi) {
    while (true) {
      const u64 N = uniform(7, hi / 2) * 2 + 1;
      bool composite = false;
      for (u64 d = 3; d * d <= N; d += 2)
        if (N % d == 0) composite = true;
      if (N < 15 || !composite) continue;
      const u64 a = uniform(2, N - 1);
      if (std::gcd(a, N) == 1) return {N, a};
    }
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace support
