#pragma once

#include "core.hpp"
#include "gate.hpp"
#include "lambda_system.hpp"
#include "optimize.hpp"
#include "sweep.hpp"
#include "synthesis.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

namespace nhqc {

namespace fs = std::filesystem;

struct OptimizeSection {
  int n_terms = 3;
  SSSPAnsatz initial;
  OptimizeOptions options;
};

struct Scenario {
  std::string name = "scenario";
  std::string command;  // optional default subcommand
  GateSpec gate = not_gate();
  std::string scheme = "NHQC+";
  SchemeParams params;
  NoiseModel noise;
  int n_states = 1001;
  int curve_points = 101;
  std::optional<SweepConfig> sweep;
  std::optional<OptimizeSection> optimize;
  std::optional<double> corrupt_detuning;
  std::string output;

  // every scheme the scenario would synthesize
  std::vector<std::string> all_schemes() const {
    std::vector<std::string> out{scheme};
    if (sweep)
      for (const auto& s : sweep->schemes)
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    return out;
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a table");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline double positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be > 0");
  return v;
}

inline GateSpec parse_gate(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "NOT") return not_gate();
    if (s == "T") return t_gate();
    throw ConfigError("gate: unknown name '" + s + "' (NOT, T or a table)");
  }
  check_keys(j, "gate", {"gamma", "theta", "phi"});
  GateSpec g{get(j, "gamma", pi, "gate"), get(j, "theta", pi / 2, "gate"), get(j, "phi", 0.0, "gate")};
  for (double v : {g.gamma, g.theta, g.phi})
    if (!std::isfinite(v)) throw ConfigError("gate: angles must be finite");
  return g;
}

inline Range parse_range(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), j.get<double>(), 1};
  check_keys(j, where, {"lo", "hi", "n"});
  Range r{get(j, "lo", 0.0, where), get(j, "hi", 0.0, where), get(j, "n", 1, where)};
  if (r.n < 1) throw ConfigError(where + ".n must be >= 1");
  if (r.n >= 2 && !(r.hi > r.lo)) throw ConfigError(where + ": need lo < hi");
  return r;
}

inline SSSPAnsatz parse_ansatz(const json& j, const std::string& where) {
  SSSPAnsatz a;
  try {
    a.a = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": expected a list of numbers");
  }
  try {
    a.validate();
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return a;
}

inline NoiseModel parse_noise(const json& j) {
  check_keys(j, "noise", {"beta", "epsilon", "gamma1_khz", "gamma2_khz", "rabi_error", "decay_to_both"});
  NoiseModel n;
  n.beta = get(j, "beta", 0.0, "noise");
  n.epsilon = get(j, "epsilon", 0.0, "noise");
  const double g1 = get(j, "gamma1_khz", 0.0, "noise");
  const double g2 = get(j, "gamma2_khz", 0.0, "noise");
  if (g1 < 0.0 || g2 < 0.0) throw ConfigError("noise: rates must be >= 0");
  n.gamma1 = khz_to_rad_per_ns(g1);
  n.gamma2 = khz_to_rad_per_ns(g2);
  const auto r = get<std::string>(j, "rabi_error", "scaled", "noise");
  if (r == "scaled")
    n.rabi = RabiError::scaled;
  else if (r == "literal")
    n.rabi = RabiError::literal;
  else
    throw ConfigError("noise.rabi_error must be 'scaled' or 'literal'");
  n.decay_to_both = get(j, "decay_to_both", true, "noise");
  return n;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
  using detail::get;
  detail::check_keys(j, "config", {"name", "command", "gate", "scheme", "timing", "noise", "sssp", "kdd", "dg",
                                   "n_states", "curve_points", "sweep", "optimize", "corrupt_detuning", "output"});
  Scenario s;
  s.name = get<std::string>(j, "name", s.name, "config");
  s.command = get<std::string>(j, "command", "", "config");
  if (j.contains("gate")) s.gate = detail::parse_gate(j.at("gate"));
  s.scheme = get<std::string>(j, "scheme", s.scheme, "config");
  if (std::find(known_schemes().begin(), known_schemes().end(), s.scheme) == known_schemes().end())
    throw ConfigError("unknown scheme '" + s.scheme + "'");

  if (j.contains("timing")) {
    const auto& t = j.at("timing");
    detail::check_keys(t, "timing", {"tau_ns", "omega0_mhz", "n_steps"});
    const double tau = detail::positive(get(t, "tau_ns", s.params.timing.tau(), "timing"), "timing.tau_ns");
    s.params.timing.T = tau / 4.0;
    if (t.contains("omega0_mhz"))
      s.params.timing.omega0 = mhz_to_rad_per_ns(detail::positive(get(t, "omega0_mhz", 0.0, "timing"), "omega0"));
    s.params.timing.n_steps = get(t, "n_steps", s.params.timing.n_steps, "timing");
    if (s.params.timing.n_steps < 4) throw ConfigError("timing.n_steps must be >= 4");
  }
  if (j.contains("noise")) s.noise = detail::parse_noise(j.at("noise"));
  if (j.contains("sssp")) s.params.custom = detail::parse_ansatz(j.at("sssp"), "sssp");
  if (j.contains("kdd")) {
    const auto& k = j.at("kdd");
    detail::check_keys(k, "kdd", {"tau_pi_fraction", "eta"});
    s.params.kdd_tau_pi_fraction =
        detail::positive(get(k, "tau_pi_fraction", s.params.kdd_tau_pi_fraction, "kdd"), "kdd.tau_pi_fraction");
    s.params.kdd_eta = get(k, "eta", 0.0, "kdd");
  }
  if (j.contains("dg")) {
    const auto& d = j.at("dg");
    detail::check_keys(d, "dg", {"detuning_ratio"});
    s.params.dg_detuning_ratio =
        detail::positive(get(d, "detuning_ratio", s.params.dg_detuning_ratio, "dg"), "dg.detuning_ratio");
  }
  s.n_states = get(j, "n_states", s.n_states, "config");
  if (s.n_states < 1) throw ConfigError("n_states must be >= 1");
  s.curve_points = get(j, "curve_points", s.curve_points, "config");
  if (s.curve_points < 2) throw ConfigError("curve_points must be >= 2");

  if (j.contains("sweep")) {
    const auto& w = j.at("sweep");
    detail::check_keys(w, "sweep", {"beta", "epsilon", "schemes", "n_states"});
    SweepConfig c;
    c.beta = w.contains("beta") ? detail::parse_range(w.at("beta"), "sweep.beta") : Range{0.0, 0.0, 1};
    c.epsilon = w.contains("epsilon") ? detail::parse_range(w.at("epsilon"), "sweep.epsilon") : Range{0.0, 0.0, 1};
    c.schemes = get(w, "schemes", std::vector<std::string>{s.scheme}, "sweep");
    c.n_states = get(w, "n_states", s.n_states, "sweep");
    if (c.n_states < 1) throw ConfigError("sweep.n_states must be >= 1");
    c.gate = s.gate;
    c.noise = s.noise;
    c.params = s.params;
    c.validate();
    s.sweep = c;
  }
  if (j.contains("optimize")) {
    const auto& o = j.at("optimize");
    detail::check_keys(o, "optimize", {"n_terms", "initial", "gate_tolerance", "max_iterations", "n_seeds",
                                       "seed_spread", "inner_steps"});
    OptimizeSection os;
    os.n_terms = get(o, "n_terms", os.n_terms, "optimize");
    if (o.contains("initial")) os.initial = detail::parse_ansatz(o.at("initial"), "optimize.initial");
    os.options.gate_tolerance = detail::positive(get(o, "gate_tolerance", os.options.gate_tolerance, "optimize"),
                                                 "optimize.gate_tolerance");
    os.options.max_iterations = get(o, "max_iterations", os.options.max_iterations, "optimize");
    os.options.n_seeds = get(o, "n_seeds", os.options.n_seeds, "optimize");
    os.options.seed_spread = get(o, "seed_spread", os.options.seed_spread, "optimize");
    os.options.n_steps = get(o, "inner_steps", os.options.n_steps, "optimize");
    if (os.n_terms < 1 || os.n_terms > 8) throw ConfigError("optimize.n_terms must be in [1, 8]");
    if (os.options.max_iterations < 1 || os.options.n_seeds < 1 || os.options.n_steps < 4)
      throw ConfigError("optimize: iterations, seeds and inner_steps must be positive");
    s.optimize = os;
  }
  if (j.contains("corrupt_detuning")) s.corrupt_detuning = get(j, "corrupt_detuning", 1.0, "config");
  s.output = get<std::string>(j, "output", "", "config");
  return s;
}

inline Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_scenario(j);
}

#ifndef NHQC_PRESET_DIR
#define NHQC_PRESET_DIR "presets"
#endif

inline fs::path preset_dir() {
  if (const char* e = std::getenv("NHQC_PRESET_DIR"); e && *e) return e;
  return NHQC_PRESET_DIR;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(preset_dir(), ec))
    if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline Scenario load_preset(const std::string& name) {
  const fs::path p = preset_dir() / (name + ".json");
  if (!fs::exists(p)) throw ConfigError("unknown preset '" + name + "'");
  return load_scenario(p);
}

// --out, then the config's output, then $NHQC_OUT_DIR/<name>, then ./out/<name>
inline fs::path resolve_out_dir(const std::string& flag, const Scenario& s) {
  if (!flag.empty()) return flag;
  if (!s.output.empty()) return s.output;
  const char* e = std::getenv("NHQC_OUT_DIR");
  const fs::path root = (e && *e) ? fs::path(e) : fs::path("out");
  return root / s.name;
}

inline PulseSchedule build_scenario_schedule(const Scenario& s) {
  PulseSchedule p = build_scheme(s.scheme, s.gate, s.params);
  if (s.corrupt_detuning) p = corrupt_detuning(p, *s.corrupt_detuning);
  return p;
}

}  // namespace nhqc
