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

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shorlev/circuit_io.hpp"
#include "shorlev/errors.hpp"
#include "shorlev/experiments.hpp"
#include "shorlev/modmath.hpp"
#include "shorlev/report.hpp"
#include "shorlev/shor.hpp"
#include "shorlev/synth.hpp"

namespace shorlev::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNoFactors = 3;

enum class OutputFormat { Json, Qasm3, Both };

struct RunConfig {
  std::string subcommand;
  u64 N = 0;
  u64 a = 0;
  unsigned m = 0;  // 0: 2n + 1
  unsigned trnc_lo = 0;
  unsigned trnc_hi = 0;
  u64 shots = 0;
  std::optional<u64> seed;
  u64 num_it = 150;
  u64 max_tries = kDefaultMaxTries;
  std::vector<u64> powers;        // empty: 2^0 .. 2^(m-1)
  std::vector<unsigned> m_values; // study only
  std::string out;
  OutputFormat format = OutputFormat::Json;
  ControlStrategy controls = ControlStrategy::Full;
  bool quiet = false;
};

// ---------------------------------------------------------------------------
// Flag value parsing
// ---------------------------------------------------------------------------

inline u64 parse_u64(std::string_view s) {
  u64 v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty())
    throw ValidationError("not a non-negative integer: '" + std::string(s) + "'");
  return v;
}

/// "lo:hi" (inclusive) or a single value.
inline std::pair<u64, u64> parse_range(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    const u64 v = parse_u64(s);
    return {v, v};
  }
  const u64 lo = parse_u64(s.substr(0, colon));
  const u64 hi = parse_u64(s.substr(colon + 1));
  if (lo > hi) throw ValidationError("empty range '" + std::string(s) + "'");
  return {lo, hi};
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

/// Comma list of integers or lo:hi ranges.
inline std::vector<u64> parse_list(std::string_view s) {
  std::vector<u64> out;
  for (auto part : split(s, ',')) {
    const auto [lo, hi] = parse_range(part);
    if (hi - lo > (u64{1} << 20)) throw ValidationError("range too long");
    for (u64 v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

/// Comma list of powers of two or lo:hi ranges; a range selects the powers
/// of two it contains. Sorted, without repeats.
inline std::vector<u64> parse_powers(std::string_view s) {
  std::vector<u64> out;
  for (auto part : split(s, ',')) {
    const auto [lo, hi] = parse_range(part);
    if (lo == hi) {
      if (!std::has_single_bit(lo))
        throw ValidationError("power " + std::to_string(lo) +
                              " is not a power of two");
      out.push_back(lo);
      continue;
    }
    for (u64 p = 1; p != 0 && p <= hi; p <<= 1)
      if (p >= lo) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ValidationError("no powers selected by '" + std::string(s) + "'");
  return out;
}

inline OutputFormat parse_format(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "qasm3") return OutputFormat::Qasm3;
  if (s == "json,qasm3" || s == "qasm3,json" || s == "both")
    return OutputFormat::Both;
  throw ValidationError("unknown format '" + std::string(s) + "'");
}

inline ControlStrategy parse_controls(std::string_view s) {
  if (s == "full") return ControlStrategy::Full;
  if (s == "minimized") return ControlStrategy::Minimized;
  throw ValidationError("unknown control strategy '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

/// Writes via a temporary sibling and rename, so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string list_text(const std::vector<u64>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

/// Emits one JSON-lines record in quiet mode.
inline void emit(std::ostream& out, const nlohmann::json& record) {
  out << record.dump() << '\n';
}

/// The circuit's action on the orbit and the cycles read off that action.
/// The cycles come from replaying the gates, not from the decomposition the
/// circuit was built from.
inline nlohmann::json certificate_json(const Orbit& orbit,
                                       const LeveledCircuit& c) {
  const auto table = permutation_table(c, orbit.states);
  std::map<u64, u64> next;
  for (std::size_t i = 0; i < table.domain.size(); ++i)
    next[table.domain[i]] = table.image[i];
  std::vector<std::vector<u64>> cycles;
  std::map<u64, bool> seen;
  bool closed = true;
  for (u64 head : orbit.states) {
    if (seen[head]) continue;
    std::vector<u64> cycle;
    u64 w = head;
    while (!seen[w]) {
      seen[w] = true;
      cycle.push_back(w);
      const auto it = next.find(w);
      if (it == next.end()) {
        closed = false;
        break;
      }
      w = it->second;
    }
    cycles.push_back(std::move(cycle));
  }
  return {{"N", orbit.instance.N},
          {"a", orbit.instance.a},
          {"power", c.power()},
          {"trnc_lv", c.trnc_lv()},
          {"domain", table.domain},
          {"image", table.image},
          {"closed_on_orbit", closed},
          {"cycles", cycles}};
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

/// Reports gcd(a, N) as a factor. Returns the exit code.
inline int report_common_factor(const NotCoprime& e, const RunConfig& cfg,
                                std::ostream& out) {
  const u64 g = e.divisor();
  if (cfg.quiet)
    emit(out, {{"event", "common_factor"},
               {"N", cfg.N},
               {"a", cfg.a},
               {"factor1", g},
               {"factor2", cfg.N / g}});
  else
    out << "gcd(" << cfg.a << ", " << cfg.N << ") = " << g
        << ": found factor " << g << " (" << cfg.N << " = " << g << " x "
        << cfg.N / g << ")\n";
  return kExitOk;
}

inline int cmd_orbit(const RunConfig& cfg, std::ostream& out) {
  try {
    const auto inst = FactoringInstance::make(cfg.N, cfg.a, cfg.m);
    const auto orbit = build_orbit(inst);
    if (cfg.quiet) {
      emit(out, {{"event", "orbit"},
                 {"N", inst.N},
                 {"a", inst.a},
                 {"n", inst.n},
                 {"r", orbit.period()},
                 {"orbit", orbit.states}});
      return kExitOk;
    }
    out << "N = " << inst.N << ", a = " << inst.a << ", n = " << inst.n
        << ", r = " << orbit.period() << '\n';
    out << "x\tf(x)\n";
    for (std::size_t x = 0; x < orbit.period(); ++x)
      out << x << '\t' << orbit.states[x] << '\n';
    out << "orbit: " << list_text(orbit.states) << '\n';
    return kExitOk;
  } catch (const NotCoprime& e) {
    return report_common_factor(e, cfg, out);
  }
}

inline int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const auto inst = FactoringInstance::make(cfg.N, cfg.a, cfg.m);
  const auto orbit = build_orbit(inst);
  if (cfg.trnc_lo >= orbit.period())
    throw ValidationError("trnc_lv must be below r = " +
                          std::to_string(orbit.period()));
  std::vector<u64> powers = cfg.powers;
  if (powers.empty())
    for (unsigned q = 0; q < inst.m; ++q) powers.push_back(u64{1} << q);

  const std::filesystem::path dir = cfg.out.empty() ? "." : cfg.out;
  const u64 r = orbit.period();
  std::map<u64, std::pair<u64, std::shared_ptr<const LeveledCircuit>>> by_residue;
  nlohmann::json manifest = nlohmann::json::array();
  for (u64 p : powers) {
    auto& slot = by_residue[p % r];
    if (!slot.second) {
      slot = {p, std::make_shared<const LeveledCircuit>(synth_me_operator(
                     orbit, p, cfg.trnc_lo, cfg.controls))};
    }
    const LeveledCircuit& c = *slot.second;
    const std::string stem = "N" + std::to_string(inst.N) + "_a" +
                             std::to_string(inst.a) + "_p" + std::to_string(p) +
                             "_t" + std::to_string(cfg.trnc_lo);
    // The shared circuit carries the power it was built for; each file is
    // labelled with its own power.
    const LeveledCircuit labelled(c.n_qubits(), p, c.levels(), c.trnc_lv(),
                                  c.version());
    nlohmann::json entry{{"power", p}, {"gates", c.gate_count()}};
    if (slot.first != p) entry["same_action_as"] = slot.first;
    if (cfg.format != OutputFormat::Qasm3) {
      write_file_atomic(dir / (stem + ".json"), to_json(labelled).dump(2) + "\n");
      entry["json"] = stem + ".json";
    }
    if (cfg.format != OutputFormat::Json) {
      write_file_atomic(dir / (stem + ".qasm"), to_openqasm3(labelled));
      entry["qasm3"] = stem + ".qasm";
    }
    write_file_atomic(dir / (stem + ".cert.json"),
                      certificate_json(orbit, labelled).dump(2) + "\n");
    entry["certificate"] = stem + ".cert.json";
    if (cfg.quiet) {
      emit(out, {{"event", "circuit"}, {"entry", entry}});
    } else {
      out << "U^" << p << ": " << c.gate_count() << " gates";
      if (slot.first != p) out << " (same action as U^" << slot.first << ")";
      out << " -> " << (dir / stem).string() << ".*\n";
    }
    manifest.push_back(std::move(entry));
  }
  const nlohmann::json m{{"N", inst.N},
                         {"a", inst.a},
                         {"r", r},
                         {"n", inst.n},
                         {"trnc_lv", cfg.trnc_lo},
                         {"controls", to_string(cfg.controls)},
                         {"circuits", manifest}};
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
  if (cfg.quiet) emit(out, {{"event", "done"}, {"files", manifest.size()}});
  return kExitOk;
}

inline int cmd_run(const RunConfig& cfg, std::ostream& out) {
  const auto inst = FactoringInstance::make(cfg.N, cfg.a, cfg.m);
  const auto orbit = build_orbit(inst);
  if (cfg.trnc_lo >= orbit.period())
    throw ValidationError("trnc_lv must be below r = " +
                          std::to_string(orbit.period()));
  if (cfg.shots > 0 && !cfg.seed)
    throw ValidationError("--seed is required when --shots > 0");
  const auto ops = synth_all_powers(orbit, inst.m, cfg.trnc_lo, cfg.controls);
  const auto exact = exact_distribution(inst, ops);
  std::optional<PhaseDistribution> sampled;
  if (cfg.shots > 0) sampled = sample(exact, cfg.shots, *cfg.seed);
  const auto table = factor_table(inst);
  const std::string csv =
      histogram_csv(inst, exact, sampled ? &*sampled : nullptr, table);
  if (cfg.out.empty()) {
    out << csv;
    return kExitOk;
  }
  write_file_atomic(cfg.out, csv);
  double factor_mass = 0.0;
  for (u64 l = 0; l < inst.M(); ++l)
    if (table[l]) factor_mass += exact.probabilities[l];
  if (cfg.quiet)
    emit(out, {{"event", "histogram"},
               {"out", cfg.out},
               {"r", orbit.period()},
               {"factor_probability", factor_mass}});
  else
    out << "wrote " << cfg.out << " (r = " << orbit.period()
        << ", factor-producing probability " << format_decimal(factor_mass)
        << ")\n";
  return kExitOk;
}

inline int cmd_factor(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.seed) throw ValidationError("--seed is required for factor");
  std::optional<FactoringInstance> inst;
  try {
    inst = FactoringInstance::make(cfg.N, cfg.a, cfg.m);
  } catch (const NotCoprime& e) {
    return report_common_factor(e, cfg, out);
  }
  const auto orbit = build_orbit(*inst);
  if (cfg.trnc_lo >= orbit.period())
    throw ValidationError("trnc_lv must be below r = " +
                          std::to_string(orbit.period()));
  if (cfg.max_tries == 0) throw ValidationError("--max-tries must be >= 1");
  const auto ops = synth_all_powers(orbit, inst->m, cfg.trnc_lo, cfg.controls);
  const auto exact = exact_distribution(*inst, ops);
  PhaseSampler sampler(exact, *cfg.seed);
  for (u64 t = 1; t <= cfg.max_tries; ++t) {
    const u64 l = sampler.draw();
    const auto rep = analyze_measurement(*inst, l);
    if (cfg.quiet)
      emit(out, {{"event", "try"}, {"try", t}, {"l", l},
                 {"factors", rep.produces_factors()}});
    const auto f = rep.factors();
    if (!f) continue;
    if (cfg.quiet) {
      auto j = to_json(rep);
      j["event"] = "factors";
      j["tries"] = t;
      emit(out, j);
    } else {
      out << to_text(rep) << "factors of " << inst->N << ": " << f->first
          << " x " << f->second << " after " << t << " tries\n";
    }
    return kExitOk;
  }
  if (cfg.quiet)
    emit(out, {{"event", "no_factors"}, {"max_tries", cfg.max_tries}});
  else
    out << "no factors within " << cfg.max_tries << " tries\n";
  return kExitNoFactors;
}

inline int cmd_study(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.seed) throw ValidationError("--seed is required for study");
  if (cfg.num_it == 0) throw ValidationError("--num-it must be >= 1");
  if (cfg.max_tries == 0) throw ValidationError("--max-tries must be >= 1");
  std::vector<unsigned> ms = cfg.m_values;
  if (ms.empty()) ms.push_back(cfg.m);
  std::vector<StudyRow> rows;
  for (unsigned m : ms) {
    const auto inst = FactoringInstance::make(cfg.N, cfg.a, m);
    const auto orbit = build_orbit(inst);
    if (cfg.trnc_hi >= orbit.period())
      throw ValidationError("truncation range must lie within [0, r = " +
                            std::to_string(orbit.period()) + ")");
    const auto table = factor_table(inst);
    for (unsigned t = cfg.trnc_lo; t <= cfg.trnc_hi; ++t) {
      rows.push_back(run_study_cell(orbit, t, table, cfg.num_it, *cfg.seed,
                                    cfg.max_tries, cfg.controls));
      const auto& res = rows.back().tries;
      if (cfg.quiet)
        emit(out, {{"event", "cell"},
                   {"m", inst.m},
                   {"trnc_lv", t},
                   {"mean_tries", res.mean},
                   {"capped_fraction", res.capped_fraction()},
                   {"peaks_present", rows.back().peaks_present()}});
    }
  }
  const std::string csv = study_csv(rows);
  if (cfg.out.empty()) {
    if (!cfg.quiet) out << csv;
    return kExitOk;
  }
  write_file_atomic(cfg.out, csv);
  write_file_atomic(cfg.out + ".json",
                    study_json(rows, *cfg.seed, cfg.controls).dump(2) + "\n");
  if (cfg.quiet)
    emit(out, {{"event", "done"}, {"rows", rows.size()}, {"out", cfg.out}});
  else
    out << "wrote " << cfg.out << " and " << cfg.out << ".json (" << rows.size()
        << " rows)\n";
  return kExitOk;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out) {
  if (cfg.subcommand == "orbit") return cmd_orbit(cfg, out);
  if (cfg.subcommand == "synth") return cmd_synth(cfg, out);
  if (cfg.subcommand == "run") return cmd_run(cfg, out);
  if (cfg.subcommand == "factor") return cmd_factor(cfg, out);
  if (cfg.subcommand == "study") return cmd_study(cfg, out);
  throw ValidationError("unknown subcommand '" + cfg.subcommand + "'");
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

/// Parses argv, runs the subcommand and maps errors to exit codes.
inline int main_entry(int argc, const char* const* argv, std::ostream& out,
                      std::ostream& err) {
  CLI::App app{"Shor's algorithm with level-synthesized modular exponentiation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "shorlev 0.1.0");

  RunConfig cfg;
  std::string trnc = "0", powers, m_list, format = "json", controls = "full";
  u64 seed = 0;

  const auto add_instance = [&](CLI::App* sub, bool with_m) {
    sub->add_option("--N", cfg.N, "Odd semiprime to factor")->required();
    sub->add_option("--a", cfg.a, "Base of the modular exponentiation")->required();
    if (with_m)
      sub->add_option("--m", cfg.m, "Control register width (default 2n+1)");
    sub->add_flag("--quiet", cfg.quiet, "Emit JSON-lines records");
  };
  const auto add_controls = [&](CLI::App* sub) {
    sub->add_option("--controls", controls, "Gate controls: full|minimized");
  };

  auto* orbit = app.add_subcommand("orbit", "Print the ME orbit and its period");
  add_instance(orbit, false);

  auto* synth = app.add_subcommand("synth", "Write U^p circuits and certificates");
  add_instance(synth, true);
  synth->add_option("--powers", powers, "Powers of two, e.g. 1,2,4 or 1:16");
  synth->add_option("--trnc-lv", trnc, "Truncation level");
  synth->add_option("--format", format, "json|qasm3|both");
  synth->add_option("--out", cfg.out, "Output directory");
  add_controls(synth);

  auto* run = app.add_subcommand("run", "Phase histogram CSV");
  add_instance(run, true);
  run->add_option("--trnc-lv", trnc, "Truncation level");
  run->add_option("--shots", cfg.shots, "Sampled shots (0: exact only)");
  auto* run_seed = run->add_option("--seed", seed, "Sampling seed");
  run->add_option("--out", cfg.out, "CSV path (default stdout)");
  add_controls(run);

  auto* factor = app.add_subcommand("factor", "Sample until factors are found");
  add_instance(factor, true);
  factor->add_option("--trnc-lv", trnc, "Truncation level");
  auto* factor_seed = factor->add_option("--seed", seed, "Sampling seed");
  factor->add_option("--max-tries", cfg.max_tries, "Give up after this many tries");
  add_controls(factor);

  auto* study = app.add_subcommand("study", "Mean tries vs truncation level");
  add_instance(study, false);
  study->add_option("--m", m_list, "Control widths, e.g. 8,10");
  study->add_option("--trnc-lv", trnc, "Truncation range lo:hi");
  auto* study_seed = study->add_option("--seed", seed, "Base seed");
  study->add_option("--num-it", cfg.num_it, "Iterations per level");
  study->add_option("--max-tries", cfg.max_tries, "Cap per iteration");
  study->add_option("--out", cfg.out, "CSV path; a .json mirror is written too");
  add_controls(study);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    cfg.subcommand = chosen->get_name();
    if ((chosen == run && run_seed->count()) ||
        (chosen == factor && factor_seed->count()) ||
        (chosen == study && study_seed->count()))
      cfg.seed = seed;
    const auto [lo, hi] = parse_range(trnc);
    if (hi > 1000) throw ValidationError("truncation level out of range");
    cfg.trnc_lo = static_cast<unsigned>(lo);
    cfg.trnc_hi = static_cast<unsigned>(hi);
    if (chosen != study && lo != hi)
      throw ValidationError("--trnc-lv takes a single level here");
    if (!powers.empty()) cfg.powers = parse_powers(powers);
    if (!m_list.empty())
      for (u64 m : parse_list(m_list)) {
        if (m == 0 || m > 62) throw ValidationError("m must be in [1, 62]");
        cfg.m_values.push_back(static_cast<unsigned>(m));
      }
    cfg.format = parse_format(format);
    cfg.controls = parse_controls(controls);
    return dispatch(cfg, out);
  } catch (const NotCoprime& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const TooLarge& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace shorlev::cli
