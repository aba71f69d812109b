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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shorlev/circuit.hpp"
#include "shorlev/errors.hpp"
#include "shorlev/modmath.hpp"
#include "shorlev/report.hpp"
#include "shorlev/synth.hpp"

namespace shorlev {

/// Probabilities (exact) or counts (sampled) over the M control outcomes.
struct PhaseDistribution {
  enum class Provenance { Exact, Sampled };

  unsigned m = 0;
  std::vector<double> probabilities;
  std::vector<u64> counts;  // sampled only
  Provenance provenance = Provenance::Exact;
  u64 shots = 0;
  u64 seed = 0;

  u64 M() const noexcept { return u64{1} << m; }
};

/// Work-register value after the controlled powers selected by the bits of
/// k act on |1>, lowest bit first. For untruncated operators this is f(k).
inline u64 control_image(const OperatorSet& ops, u64 k) {
  u64 w = 1;
  for (std::size_t q = 0; q < ops.size(); ++q)
    if ((k >> q) & 1u) w = apply_to_basis(*ops[q], w);
  return w;
}

namespace detail {

/// Owns an in-place complex buffer and a forward DFT plan of length M.
/// FFTW's planner is not reentrant, so plan creation and destruction are
/// serialized; execution is not.
class ForwardDft {
 public:
  explicit ForwardDft(std::size_t M) : size_(M) {
    buf_ = fftw_alloc_complex(M);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(M), buf_, buf_, FFTW_FORWARD,
                             FFTW_ESTIMATE);
  }
  ~ForwardDft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(buf_);
  }
  ForwardDft(const ForwardDft&) = delete;
  ForwardDft& operator=(const ForwardDft&) = delete;

  fftw_complex* data() noexcept { return buf_; }
  std::size_t size() const noexcept { return size_; }
  void execute() noexcept { fftw_execute(plan_); }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
  }

  std::size_t size_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// Exact control-register distribution after the inverse QFT:
///
///   P(l) = 1/M^2 * sum_w | sum_{k : w(k) = w} exp(-2 pi i k l / M) |^2
///
/// evaluated with one length-M FFT per distinct work image w.
inline PhaseDistribution exact_distribution(const FactoringInstance& inst,
                                            const OperatorSet& ops) {
  if (ops.size() < inst.m)
    throw ValidationError("need one operator per control qubit");
  const std::size_t M = inst.M();
  std::map<u64, std::vector<u64>> groups;
  for (u64 k = 0; k < M; ++k) groups[control_image(ops, k)].push_back(k);

  PhaseDistribution dist;
  dist.m = inst.m;
  dist.probabilities.assign(M, 0.0);
  const double norm = 1.0 / (static_cast<double>(M) * static_cast<double>(M));
  detail::ForwardDft dft(M);
  for (const auto& [w, ks] : groups) {
    fftw_complex* buf = dft.data();
    std::fill(buf[0], buf[0] + 2 * M, 0.0);
    for (u64 k : ks) buf[k][0] = 1.0;
    dft.execute();
    for (std::size_t l = 0; l < M; ++l)
      dist.probabilities[l] +=
          norm * (buf[l][0] * buf[l][0] + buf[l][1] * buf[l][1]);
  }
  return dist;
}

/// Closed-form amplitude A_l(s / r) of the eigenphase s / r at outcome l:
///
///   1/(sqrt(r) M) * (1 - e^{2 pi i (phi - l/M) M}) / (1 - e^{2 pi i (phi - l/M)})
///
/// The removable singularity phi = l/M evaluates to 1/sqrt(r). Phases are
/// reduced with integer arithmetic before the trigonometry.
inline std::complex<double> analytic_amplitude(u64 s, u64 r, u64 l, u64 M) {
  if (r == 0 || M == 0 || l >= M)
    throw ValidationError("analytic_amplitude requires r, M > 0, 0 <= l < M");
  const double scale = 1.0 / (std::sqrt(static_cast<double>(r)) *
                              static_cast<double>(M));
  const u64 period = r * M;
  // (s/r - l/M) = (s M - l r) / (r M), taken mod 1.
  const u64 delta = (mul_mod(s % r, M, period) + period - mul_mod(l, r, period)) % period;
  if (delta == 0) return {scale * static_cast<double>(M), 0.0};
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double theta = two_pi * static_cast<double>(delta) / static_cast<double>(period);
  // theta * M = 2 pi delta / r.
  const double theta_m = two_pi * static_cast<double>(delta % r) / static_cast<double>(r);
  const std::complex<double> num = 1.0 - std::polar(1.0, theta_m);
  const std::complex<double> den = 1.0 - std::polar(1.0, theta);
  return scale * num / den;
}

/// u_s = 1/sqrt(r) sum_k e^{-2 pi i k s / r} |f(k)> over the 2^n work basis.
inline std::vector<Amplitude> eigenstate_vector(const Orbit& orbit, u64 s) {
  const u64 r = orbit.period();
  if (s >= r) throw ValidationError("eigenstate index must be < r");
  std::vector<Amplitude> v(std::size_t{1} << orbit.instance.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  for (u64 k = 0; k < r; ++k) {
    const double angle = -2.0 * std::numbers::pi *
                         static_cast<double>((k * s) % r) /
                         static_cast<double>(r);
    v[orbit.states[k]] = std::polar(scale, angle);
  }
  return v;
}

/// Draws single outcomes from an exact distribution by inverse CDF.
/// Uniforms come from the top 53 bits of mt19937_64, so draws are identical
/// across standard libraries.
class PhaseSampler {
 public:
  PhaseSampler(const PhaseDistribution& dist, u64 seed)
      : cdf_(dist.probabilities.size()), rng_(seed) {
    if (cdf_.empty()) throw ValidationError("empty distribution");
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf_.size(); ++i) {
      acc += std::max(0.0, dist.probabilities[i]);
      cdf_[i] = acc;
    }
    if (!(acc > 0.0)) throw ValidationError("distribution has no mass");
  }

  u64 draw() {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53 * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf_.begin());
    if (idx >= cdf_.size()) idx = cdf_.size() - 1;
    // Skip zero-width bins that upper_bound can land on at a boundary.
    while (idx > 0 && cdf_[idx] == cdf_[idx - 1]) --idx;
    return idx;
  }

 private:
  std::vector<double> cdf_;
  std::mt19937_64 rng_;
};

/// Multinomial draw of `shots` outcomes; deterministic for a fixed seed.
inline PhaseDistribution sample(const PhaseDistribution& exact, u64 shots,
                                u64 seed) {
  if (shots == 0) throw ValidationError("shots must be >= 1");
  PhaseSampler sampler(exact, seed);
  PhaseDistribution out;
  out.m = exact.m;
  out.provenance = PhaseDistribution::Provenance::Sampled;
  out.shots = shots;
  out.seed = seed;
  out.counts.assign(exact.probabilities.size(), 0);
  for (u64 i = 0; i < shots; ++i) ++out.counts[sampler.draw()];
  out.probabilities.resize(out.counts.size());
  for (std::size_t l = 0; l < out.counts.size(); ++l)
    out.probabilities[l] =
        static_cast<double>(out.counts[l]) / static_cast<double>(shots);
  return out;
}

/// Reference backend: the full (m + n)-qubit statevector carried through
/// Hadamards, gate-level controlled powers and a dense inverse QFT. Control
/// qubit q is bit q of the index; work qubit j is bit m + j.
inline PhaseDistribution run_shor_dense(const FactoringInstance& inst,
                                        const OperatorSet& ops,
                                        unsigned max_qubits = 22) {
  const unsigned m = inst.m, n = inst.n;
  if (m + n > max_qubits)
    throw TooLarge(std::to_string(m + n) + " qubits exceed the dense cap of " +
                   std::to_string(max_qubits));
  if (ops.size() < m)
    throw ValidationError("need one operator per control qubit");
  const std::size_t M = std::size_t{1} << m;
  const std::size_t dim = std::size_t{1} << (m + n);
  std::vector<Amplitude> psi(dim);
  psi[std::size_t{1} << m] = 1.0;  // |0>_c |1>_w

  const double h = 1.0 / std::numbers::sqrt2;
  for (unsigned q = 0; q < m; ++q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const Amplitude a = psi[i], b = psi[i | bit];
      psi[i] = h * (a + b);
      psi[i | bit] = h * (a - b);
    }
  }

  for (unsigned q = 0; q < m; ++q) {
    const std::size_t ctl = std::size_t{1} << q;
    for (const auto& level : ops[q]->levels()) {
      for (const auto& g : level) {
        const std::size_t tbit = std::size_t{1} << (m + g.target());
        for (std::size_t i = 0; i < dim; ++i)
          if ((i & ctl) && !(i & tbit) && g.fires_on(i >> m))
            std::swap(psi[i], psi[i | tbit]);
      }
    }
  }

  std::vector<Amplitude> twiddle(M);
  for (std::size_t j = 0; j < M; ++j)
    twiddle[j] = std::polar(1.0, -2.0 * std::numbers::pi *
                                     static_cast<double>(j) /
                                     static_cast<double>(M));
  const double qft_scale = 1.0 / std::sqrt(static_cast<double>(M));
  PhaseDistribution dist;
  dist.m = m;
  dist.probabilities.assign(M, 0.0);
  std::vector<Amplitude> slice(M);
  for (std::size_t w = 0; w < (std::size_t{1} << n); ++w) {
    const std::size_t base = w << m;
    for (std::size_t l = 0; l < M; ++l) {
      Amplitude acc = 0.0;
      for (std::size_t k = 0; k < M; ++k)
        acc += twiddle[(k * l) & (M - 1)] * psi[base + k];
      slice[l] = qft_scale * acc;
    }
    for (std::size_t l = 0; l < M; ++l) dist.probabilities[l] += std::norm(slice[l]);
  }
  return dist;
}

/// Histogram CSV: one row per outcome with nonzero probability or count.
/// Probabilities below `zero_tol` count as zero (FFT round-off).
inline std::string histogram_csv(const FactoringInstance& inst,
                                 const PhaseDistribution& exact,
                                 const PhaseDistribution* sampled,
                                 const std::vector<bool>& produces_factors,
                                 double zero_tol = 1e-14) {
  std::ostringstream os;
  os << "ell,phase_binary,phase_decimal,probability,counts,produces_factors\n";
  const u64 M = inst.M();
  for (u64 l = 0; l < M; ++l) {
    const double p = exact.probabilities[l];
    const u64 c = sampled ? sampled->counts[l] : 0;
    if (p <= zero_tol && c == 0) continue;
    os << l << ',' << phase_binary(l, inst.m) << ','
       << format_decimal(static_cast<double>(l) / static_cast<double>(M)) << ','
       << format_decimal(p) << ',' << c << ','
       << (produces_factors[l] ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace shorlev
