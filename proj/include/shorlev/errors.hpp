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
#include <stdexcept>
#include <string>

namespace shorlev {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violated a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// gcd(a, N) > 1. The common divisor is itself a factor of N.
class NotCoprime : public Error {
 public:
  NotCoprime(std::uint64_t N, std::uint64_t a, std::uint64_t divisor)
      : Error("gcd(" + std::to_string(a) + ", " + std::to_string(N) +
              ") = " + std::to_string(divisor)),
        divisor_(divisor) {}

  std::uint64_t divisor() const noexcept { return divisor_; }

 private:
  std::uint64_t divisor_;
};

/// gcd(a^{r/2} +- 1, N) produced 1 or N.
class TrivialFactor : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Synthesis could not separate an intermediate value from a protected one.
/// Never expected in practice; signals an internal bug.
class ProtectedCollision : public Error {
 public:
  using Error::Error;
};

/// A dense simulation would exceed the configured qubit cap.
class TooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace shorlev
