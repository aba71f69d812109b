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

#include <charconv>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "shorlev/modmath.hpp"

namespace shorlev {

/// Shortest decimal that round-trips, always with a fractional part.
inline std::string format_decimal(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline std::string pair_text(const Fraction& f) {
  return "(" + std::to_string(f.s) + ", " + std::to_string(f.r) + ")";
}

}  // namespace detail

/// Renders the analysis block in the analysis-script layout:
///
///   l_measured   : 00101 5 frequency: 466
///   phi_phase_bin: 0.00101
///   ...
///   conv: (1, 6) r = 6 : factors
///   factor1: 7
///   factor2: 3
inline std::string to_text(const ConvergentReport& rep,
                           std::optional<u64> frequency = std::nullopt) {
  std::ostringstream os;
  os << "l_measured   : " << rep.phase_binary.substr(2) << ' '
     << rep.l_measured;
  if (frequency) os << " frequency: " << *frequency;
  os << '\n';
  os << "phi_phase_bin: " << rep.phase_binary << '\n';
  os << "phi_phase_dec: " << format_decimal(rep.phase_decimal()) << '\n';
  os << "phi_phase_frc: " << detail::pair_text(rep.phase_fraction) << '\n';
  os << "cont frc of phi  : [";
  for (std::size_t i = 0; i < rep.cf_terms.size(); ++i)
    os << (i ? ", " : "") << rep.cf_terms[i];
  os << "]\n";
  os << "convergents of phi: [";
  for (std::size_t i = 0; i < rep.convergents.size(); ++i)
    os << (i ? ", " : "") << detail::pair_text(rep.convergents[i]);
  os << "]\n";
  for (const auto& v : rep.verdicts) {
    os << "conv: " << detail::pair_text(v.convergent) << " r = "
       << v.convergent.r << " : ";
    if (v.factors) {
      os << "factors\n"
         << "factor1: " << v.factors->first << '\n'
         << "factor2: " << v.factors->second << '\n';
    } else {
      os << "no factors found\n";
    }
  }
  return os.str();
}

inline const char* verdict_name(ConvergentVerdict::Kind k) noexcept {
  switch (k) {
    case ConvergentVerdict::Kind::RejectedOdd: return "rejected_odd";
    case ConvergentVerdict::Kind::RejectedCheck: return "rejected_check";
    case ConvergentVerdict::Kind::RejectedTrivial: return "rejected_trivial";
    case ConvergentVerdict::Kind::Factors: return "factors";
  }
  return "?";
}

inline nlohmann::json to_json(const ConvergentReport& rep,
                              std::optional<u64> frequency = std::nullopt) {
  using nlohmann::json;
  json j;
  j["l_measured"] = rep.l_measured;
  if (frequency) j["frequency"] = *frequency;
  j["phi_phase_bin"] = rep.phase_binary;
  j["phi_phase_dec"] = rep.phase_decimal();
  j["phi_phase_frc"] = {rep.phase_fraction.s, rep.phase_fraction.r};
  j["cont_frc_of_phi"] = rep.cf_terms;
  json convs = json::array();
  for (const auto& c : rep.convergents) convs.push_back({c.s, c.r});
  j["convergents_of_phi"] = std::move(convs);
  json verdicts = json::array();
  for (const auto& v : rep.verdicts) {
    json e{{"conv", {v.convergent.s, v.convergent.r}},
           {"r", v.convergent.r},
           {"verdict", verdict_name(v.kind)},
           {"check", to_string(v.check)}};
    if (v.factors) {
      e["factor1"] = v.factors->first;
      e["factor2"] = v.factors->second;
    }
    verdicts.push_back(std::move(e));
  }
  j["conv"] = std::move(verdicts);
  if (auto f = rep.factors()) {
    j["factor1"] = f->first;
    j["factor2"] = f->second;
  } else {
    j["factor1"] = nullptr;
    j["factor2"] = nullptr;
  }
  return j;
}

}  // namespace shorlev
