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

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shorlev/circuit.hpp"

namespace shorlev {

// ---------------------------------------------------------------------------
// JSON circuit schema
//
//   {"n_qubits": 5, "power": 2, "trnc_lv": 0, "version": "per_power",
//    "levels": [[{"gate": "x", "target": 0},
//                {"gate": "mcx", "target": 1,
//                 "controls": [{"q": 0, "neg": false}]}], [], ...]}
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Gate& g) {
  if (g.is_not()) return {{"gate", "x"}, {"target", g.target()}};
  nlohmann::json controls = nlohmann::json::array();
  for (const auto& c : g.controls())
    controls.push_back({{"q", c.qubit}, {"neg", c.negative}});
  return {{"gate", "mcx"}, {"target", g.target()}, {"controls", controls}};
}

inline nlohmann::json to_json(const LeveledCircuit& c) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : c.levels()) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : level) gates.push_back(to_json(g));
    levels.push_back(std::move(gates));
  }
  return {{"n_qubits", c.n_qubits()},
          {"power", c.power()},
          {"trnc_lv", c.trnc_lv()},
          {"version", to_string(c.version())},
          {"levels", std::move(levels)}};
}

inline CircuitVersion parse_version(std::string_view s) {
  if (s == "concatenated") return CircuitVersion::Concatenated;
  if (s == "per_power") return CircuitVersion::PerPower;
  if (s == "truncated") return CircuitVersion::Truncated;
  throw ValidationError("unknown circuit version '" + std::string(s) + "'");
}

inline Gate gate_from_json(const nlohmann::json& j) {
  const auto kind = j.at("gate").get<std::string>();
  const auto target = j.at("target").get<Qubit>();
  if (kind == "x") return Gate::x(target);
  if (kind != "mcx")
    throw ValidationError("unknown gate kind '" + kind + "'");
  std::vector<Control> controls;
  for (const auto& c : j.at("controls"))
    controls.push_back({c.at("q").get<Qubit>(), c.at("neg").get<bool>()});
  return Gate::mcx(target, std::move(controls));
}

/// Throws ValidationError on schema violations.
inline LeveledCircuit circuit_from_json(const nlohmann::json& j) {
  try {
    std::vector<Level> levels;
    for (const auto& jl : j.at("levels")) {
      Level level;
      for (const auto& jg : jl) level.push_back(gate_from_json(jg));
      levels.push_back(std::move(level));
    }
    return LeveledCircuit(j.at("n_qubits").get<unsigned>(),
                          j.at("power").get<u64>(), std::move(levels),
                          j.at("trnc_lv").get<unsigned>(),
                          parse_version(j.at("version").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed circuit JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// OpenQASM 3
// ---------------------------------------------------------------------------

/// Negative controls are lowered to X conjugation first. A single
/// `barrier q;` separates consecutive levels, so blank levels survive as
/// back-to-back barriers.
inline std::string to_openqasm3(const LeveledCircuit& circuit) {
  const LeveledCircuit c = lower_negative_controls(circuit);
  std::ostringstream os;
  os << "OPENQASM 3.0;\n"
     << "include \"stdgates.inc\";\n"
     << "// power " << c.power() << ", trnc_lv " << c.trnc_lv() << ", version "
     << to_string(c.version()) << ", " << c.levels().size() << " levels\n"
     << "qubit[" << c.n_qubits() << "] q;\n";
  for (std::size_t x = 0; x < c.levels().size(); ++x) {
    if (x > 0) os << "barrier q;\n";
    for (const auto& g : c.levels()[x]) {
      const auto& ctl = g.controls();
      if (ctl.empty()) {
        os << "x q[" << g.target() << "];\n";
        continue;
      }
      os << "ctrl";
      if (ctl.size() > 1) os << '(' << ctl.size() << ')';
      os << " @ x";
      for (const auto& cq : ctl) os << " q[" << cq.qubit << "],";
      os << " q[" << g.target() << "];\n";
    }
  }
  return os.str();
}

namespace detail {

class QasmCursor {
 public:
  explicit QasmCursor(std::string_view s) : s_(s) {}

  void skip_space() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_.substr(pos_, 2) == "//") {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  bool done() {
    skip_space();
    return pos_ >= s_.size();
  }
  bool accept(std::string_view tok) {
    skip_space();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok) {
    if (!accept(tok))
      throw ValidationError("OpenQASM: expected '" + std::string(tok) +
                            "' at offset " + std::to_string(pos_));
  }
  unsigned number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (start == pos_)
      throw ValidationError("OpenQASM: expected integer at offset " +
                            std::to_string(start));
    return static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start))));
  }
  Qubit qubit_ref() {
    expect("q");
    expect("[");
    const unsigned q = number();
    expect("]");
    return q;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Reads back the subset emitted by to_openqasm3: x, ctrl[(k)] @ x, and
/// barrier over a single register `q`. Power/trnc metadata is not carried by
/// the text and is passed in by the caller.
inline LeveledCircuit from_openqasm3(std::string_view text, u64 power = 1,
                                     unsigned trnc_lv = 0,
                                     CircuitVersion version =
                                         CircuitVersion::PerPower) {
  detail::QasmCursor cur(text);
  cur.expect("OPENQASM");
  cur.expect("3.0");
  cur.expect(";");
  cur.expect("include");
  cur.expect("\"stdgates.inc\"");
  cur.expect(";");
  cur.expect("qubit");
  cur.expect("[");
  const unsigned n = cur.number();
  cur.expect("]");
  cur.expect("q");
  cur.expect(";");
  std::vector<Level> levels(1);
  while (!cur.done()) {
    if (cur.accept("barrier")) {
      cur.expect("q");
      cur.expect(";");
      levels.emplace_back();
    } else if (cur.accept("ctrl")) {
      unsigned k = 1;
      if (cur.accept("(")) {
        k = cur.number();
        cur.expect(")");
      }
      cur.expect("@");
      cur.expect("x");
      std::vector<Control> controls;
      for (unsigned i = 0; i < k; ++i) {
        controls.push_back({cur.qubit_ref(), false});
        cur.expect(",");
      }
      const Qubit t = cur.qubit_ref();
      cur.expect(";");
      levels.back().push_back(Gate::mcx(t, std::move(controls)));
    } else if (cur.accept("x")) {
      const Qubit t = cur.qubit_ref();
      cur.expect(";");
      levels.back().push_back(Gate::x(t));
    } else {
      throw ValidationError("OpenQASM: unsupported statement");
    }
  }
  return LeveledCircuit(n, power, std::move(levels), trnc_lv, version);
}

}  // namespace shorlev
