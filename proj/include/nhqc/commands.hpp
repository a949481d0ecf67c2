#pragma once

#include "holonomy.hpp"
#include "optimize.hpp"
#include "scenario.hpp"
#include "sensitivity.hpp"
#include "sweep.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace nhqc {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_synthesis = 3, exit_numerical = 4 };

struct RunOptions {
  fs::path out_dir;
  int workers = 0;
  std::uint64_t seed = 12345;
  std::ostream* log = &std::cerr;
};

namespace detail {

inline void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + p.string() + "'");
  os << text;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json gate_json(const GateSpec& g) { return {{"gamma", g.gamma}, {"theta", g.theta}, {"phi", g.phi}}; }

// run metadata, the only place a timestamp is written
inline void write_sidecar(const RunOptions& o, const std::string& cmd, const Scenario& s, nlohmann::json extra = {}) {
  nlohmann::json j = {{"command", cmd},      {"scenario", s.name}, {"seed", o.seed},
                      {"workers", resolve_workers(o.workers)}, {"timestamp_utc", utc_now()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  write_json(o.out_dir / (cmd + ".run.json"), j);
}

}  // namespace detail

inline int cmd_synth(const Scenario& s, const RunOptions& o) {
  const PulseSchedule p = build_scenario_schedule(s);
  std::ostringstream csv;
  write_schedule_csv(csv, p);
  detail::write_text(o.out_dir / "pulse.csv", csv.str());
  const VerifierReport r = verify_schedule(p, s.gate, s.n_states);
  nlohmann::json j = r;
  j["scheme"] = s.scheme;
  j["gate"] = detail::gate_json(s.gate);
  const auto fails = r.failures();
  j["passed"] = fails.empty();
  j["failures"] = fails;
  detail::write_json(o.out_dir / "verifier.json", j);
  detail::write_sidecar(o, "synth", s);
  for (const auto& f : fails) *o.log << "verifier: " << f << "\n";
  return fails.empty() ? exit_ok : exit_synthesis;
}

inline int cmd_simulate(const Scenario& s, const RunOptions& o) {
  const PulseSchedule p = build_scenario_schedule(s);
  const double f = average_gate_fidelity(p, s.gate, s.noise, s.n_states);
  const FidelityCurve c = fidelity_curve(p, s.noise, s.n_states, s.curve_points);
  std::string csv = "t_over_tau,fidelity\n";
  for (std::size_t k = 0; k < c.fidelity.size(); ++k)
    csv += fmt::format("{:.12g},{:.12g}\n", c.t_over_tau[k], c.fidelity[k]);
  detail::write_text(o.out_dir / "fidelity_curve.csv", csv);
  detail::write_json(o.out_dir / "simulate.json", {{"scheme", s.scheme},
                                                   {"gate", detail::gate_json(s.gate)},
                                                   {"n_states", s.n_states},
                                                   {"fidelity", f},
                                                   {"beta", s.noise.beta},
                                                   {"epsilon", s.noise.epsilon},
                                                   {"gamma1_rad_per_ns", s.noise.gamma1},
                                                   {"gamma2_rad_per_ns", s.noise.gamma2}});
  detail::write_sidecar(o, "simulate", s);
  *o.log << fmt::format("{} fidelity {:.6f}\n", s.scheme, f);
  return exit_ok;
}

inline int cmd_sweep(const Scenario& s, const RunOptions& o) {
  if (!s.sweep) throw ConfigError("sweep: config has no 'sweep' table");
  SweepConfig c = *s.sweep;
  c.workers = o.workers;
  const SweepResult r = c.epsilon.n > 1 ? robustness_map_beta_epsilon(c) : robustness_sweep_beta(c);
  std::ostringstream csv;
  write_sweep_csv(csv, r);
  detail::write_text(o.out_dir / "sweep.csv", csv.str());
  nlohmann::json summary;
  for (const auto& sc : c.schemes) {
    double lo = 1.0;
    for (const auto* cell : r.for_scheme(sc)) lo = std::min(lo, cell->fidelity);
    summary[sc] = {{"min_fidelity", lo},
                   {"area_above_0.99", area_fraction(r, sc, 0.99)},
                   {"area_above_0.999", area_fraction(r, sc, 0.999)}};
  }
  nlohmann::json meta = r.metadata;
  meta["summary"] = summary;
  detail::write_sidecar(o, "sweep", s, {{"sweep", meta}});
  if (r.failed() > 0) {
    *o.log << fmt::format("sweep: {} cells failed\n", r.failed());
    return exit_numerical;
  }
  return exit_ok;
}

inline int cmd_optimize(const Scenario& s, const RunOptions& o) {
  if (!s.optimize) throw ConfigError("optimize: config has no 'optimize' table");
  OptimizeOptions opt = s.optimize->options;
  opt.seed = o.seed;
  const auto r = optimize_sssp_coeffs(s.optimize->n_terms, s.gate, s.optimize->initial, s.params.timing, opt);
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& a : r.seeds) seeds.push_back(a.a);
  detail::write_json(o.out_dir / "optimize.json", {{"gate", detail::gate_json(s.gate)},
                                                   {"n_terms", s.optimize->n_terms},
                                                   {"initial", s.optimize->initial.a},
                                                   {"coefficients", r.best.a},
                                                   {"qs_before", r.qs_initial},
                                                   {"qs_after", r.qs},
                                                   {"gate_distance", r.gate_distance},
                                                   {"gate_tolerance", opt.gate_tolerance},
                                                   {"feasible", r.feasible},
                                                   {"violation", r.violation},
                                                   {"evaluations", r.evaluations},
                                                   {"seeds", seeds}});
  detail::write_sidecar(o, "optimize", s);
  if (!r.feasible) {
    *o.log << fmt::format("optimize: gate constraint violated by {:.3g} (distance {:.3g} > {:.3g})\n", r.violation,
                          r.gate_distance, opt.gate_tolerance);
    return exit_synthesis;
  }
  return exit_ok;
}

// collates verifier.json, simulate.json and sweep.csv files below dir into report.md
inline int cmd_report(const fs::path& dir, std::ostream& log = std::cerr) {
  if (!fs::is_directory(dir)) throw ConfigError("report: '" + dir.string() + "' is not a directory");
  std::vector<fs::path> verifiers, sims, sweeps;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto n = e.path().filename().string();
    if (n == "verifier.json") verifiers.push_back(e.path());
    if (n == "simulate.json") sims.push_back(e.path());
    if (n == "sweep.csv") sweeps.push_back(e.path());
  }
  if (verifiers.empty() && sims.empty() && sweeps.empty())
    throw ConfigError("report: no verifier.json, simulate.json or sweep.csv under '" + dir.string() + "'");
  for (auto* v : {&verifiers, &sims, &sweeps}) std::sort(v->begin(), v->end());
  auto rel = [&](const fs::path& p) { return fs::relative(p.parent_path(), dir).generic_string(); };
  auto read_json = [](const fs::path& p) {
    std::ifstream in(p);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("report: cannot parse '" + p.string() + "': " + e.what());
    }
  };

  std::string md = "# Run report\n\n";
  if (!verifiers.empty()) {
    md += "## Verifier\n\n| run | scheme | residual | max offdiag | dyn phase | geo phase | leakage | fidelity | passed |\n"
          "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& p : verifiers) {
      const auto j = read_json(p);
      md += fmt::format("| {} | {} | {:.3g} | {:.3g} | {:.3g} | {:.6f} | {:.3g} | {:.6f} | {} |\n", rel(p),
                        j.value("scheme", "?"), j.value("residual_von_neumann", 0.0), j.value("max_offdiag", 0.0),
                        j.value("dyn_phase", 0.0), j.value("geo_phase", 0.0), j.value("leakage", 0.0),
                        j.value("fidelity", 0.0), j.value("passed", false) ? "yes" : "no");
    }
    md += "\n";
  }
  if (!sims.empty()) {
    md += "## Simulation\n\n| run | scheme | states | fidelity |\n|---|---|---|---|\n";
    for (const auto& p : sims) {
      const auto j = read_json(p);
      md += fmt::format("| {} | {} | {} | {:.6f} |\n", rel(p), j.value("scheme", "?"), j.value("n_states", 0),
                        j.value("fidelity", 0.0));
    }
    md += "\n";
  }
  for (const auto& p : sweeps) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (line != "scheme,beta,epsilon,fidelity,leakage") throw ConfigError("report: bad sweep header in " + p.string());
    struct Agg {
      int n = 0;
      double fmin = 1.0, fmax = 0.0, at0 = -1.0;
      int above99 = 0, above999 = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Agg> agg;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string scheme, b, e, f;
      std::getline(ss, scheme, ',');
      std::getline(ss, b, ',');
      std::getline(ss, e, ',');
      std::getline(ss, f, ',');
      if (!agg.count(scheme)) order.push_back(scheme);
      auto& a = agg[scheme];
      const double fv = std::stod(f);
      ++a.n;
      a.fmin = std::min(a.fmin, fv);
      a.fmax = std::max(a.fmax, fv);
      if (std::stod(b) == 0.0 && std::stod(e) == 0.0) a.at0 = fv;
      a.above99 += fv > 0.99;
      a.above999 += fv > 0.999;
    }
    md += fmt::format("## Sweep {}\n\n| scheme | cells | F(0,0) | min F | max F | frac F>0.99 | frac F>0.999 |\n"
                      "|---|---|---|---|---|---|---|\n",
                      rel(p));
    for (const auto& sc : order) {
      const auto& a = agg[sc];
      md += fmt::format("| {} | {} | {} | {:.6f} | {:.6f} | {:.3f} | {:.3f} |\n", sc, a.n,
                        a.at0 < 0 ? std::string("-") : fmt::format("{:.6f}", a.at0), a.fmin, a.fmax,
                        static_cast<double>(a.above99) / a.n, static_cast<double>(a.above999) / a.n);
    }
    md += "\n";
  }
  detail::write_text(dir / "report.md", md);
  log << "wrote " << (dir / "report.md").string() << "\n";
  return exit_ok;
}

// maps library exceptions to exit codes
template <class F>
int guarded(F&& f, std::ostream& log = std::cerr) {
  try {
    return f();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const SynthesisError& e) {
    log << "synthesis error: " << e.what() << "\n";
    return exit_synthesis;
  } catch (const VerificationError& e) {
    log << "verification error: " << e.what() << "\n";
    return exit_synthesis;
  } catch (const NumericalError& e) {
    log << "numerical error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}

}  // namespace nhqc
