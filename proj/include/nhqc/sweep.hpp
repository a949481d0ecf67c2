#pragma once

#include "core.hpp"
#include "holonomy.hpp"
#include "synthesis.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace nhqc {

struct SchemeParams {
  GateTiming timing;
  double kdd_tau_pi_fraction = 0.01;
  double kdd_eta = 0.0;
  double dg_detuning_ratio = 2.0;
  SSSPAnsatz custom;  // for scheme "NHQC+SSSP"
};

inline const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> s{"NHQC+",      "NHQC",       "DG",        "NHQC+SSSP3",
                                          "NHQC+SSSP5", "NHQC+SSSP7", "NHQC+SSSP", "NHQC+KDD"};
  return s;
}

inline PulseSchedule build_scheme(const std::string& id, const GateSpec& g, const SchemeParams& sp) {
  const GateTiming& tm = sp.timing;
  const double tau = tm.tau();
  PulseSchedule p;
  if (id == "NHQC+") {
    p = two_interval_gate(g, tm);
  } else if (id == "NHQC") {
    p = nhqc_baseline_schedule(g, tau, tm.n_steps, tm.omega0);
  } else if (id == "DG") {
    p = dg_baseline_schedule(g, tau, tm.n_steps, tm.omega0, sp.dg_detuning_ratio);
  } else if (id == "NHQC+SSSP3" || id == "NHQC+SSSP5" || id == "NHQC+SSSP7" || id == "NHQC+SSSP") {
    const SSSPAnsatz a = id == "NHQC+SSSP3"   ? sssp3()
                         : id == "NHQC+SSSP5" ? sssp5()
                         : id == "NHQC+SSSP7" ? sssp7()
                                              : sp.custom;
    p = synthesize_sssp_schedule(g, a, tm);
  } else if (id == "NHQC+KDD") {
    if (std::abs(wrap_angle(g.gamma - pi)) > 1e-12) throw ConfigError("NHQC+KDD only realizes gamma = pi gates");
    p = build_kdd_sequence(sp.kdd_eta, tau, sp.kdd_tau_pi_fraction * tau, mixing_for(g), tm.omega0);
  } else {
    throw ConfigError("unknown scheme '" + id + "'");
  }
  p.scheme = id;
  return p;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;
  double at(int k) const { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); }
};

struct SweepConfig {
  Range beta{-0.2, 0.2, 41};
  Range epsilon{0.0, 0.0, 1};
  std::vector<std::string> schemes{"NHQC+", "NHQC", "DG"};
  GateSpec gate = not_gate();
  NoiseModel noise;  // beta and epsilon are overwritten per cell
  SchemeParams params;
  int n_states = 1001;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const {
    for (const Range* r : {&beta, &epsilon}) {
      if (r->n < 1) throw ConfigError("sweep range needs n >= 1");
      if (r->n >= 2 && !(r->hi > r->lo)) throw ConfigError("sweep range must be ordered (lo < hi)");
    }
    if (schemes.empty()) throw ConfigError("sweep needs at least one scheme");
    for (const auto& s : schemes)
      if (std::find(known_schemes().begin(), known_schemes().end(), s) == known_schemes().end())
        throw ConfigError("unknown scheme '" + s + "'");
  }
};

struct SweepCell {
  std::string scheme;
  double beta = 0.0;
  double epsilon = 0.0;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double leakage = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty when the cell succeeded
};

struct SweepResult {
  std::vector<SweepCell> cells;  // scheme-major, then beta, then epsilon
  nlohmann::json metadata;

  std::vector<const SweepCell*> for_scheme(const std::string& s) const {
    std::vector<const SweepCell*> out;
    for (const auto& c : cells)
      if (c.scheme == s) out.push_back(&c);
    return out;
  }
  int failed() const {
    return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.error.empty(); }));
  }
};

inline int resolve_workers(int w) {
  if (w > 0) return w;
  return std::max(1u, std::thread::hardware_concurrency());
}

// runs f(i) for i in [0, n) on `workers` threads; each index is written by exactly one thread
template <class F>
void parallel_for(int n, int workers, F&& f) {
  workers = std::min(resolve_workers(workers), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

inline void evaluate_cell(SweepCell& c, const PulseSchedule& p, const SweepConfig& cfg) {
  try {
    NoiseModel n = cfg.noise;
    n.beta = c.beta;
    n.epsilon = c.epsilon;
    const Operator target = embed(target_unitary(cfg.gate));
    const Operator u = propagate_schedule(p, n);
    c.leakage = extract_gate(u).leakage;
    c.fidelity = has_decoherence(n) ? average_fidelity_channel(propagate_schedule_channel(p, n), target, cfg.n_states)
                                    : average_fidelity_unitary(u, target, cfg.n_states);
  } catch (const std::exception& e) {
    c.error = e.what();
  }
}

inline SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult res;
  std::map<std::string, PulseSchedule> sched;
  std::map<std::string, std::string> build_err;
  for (const auto& s : cfg.schemes) {
    try {
      sched.emplace(s, build_scheme(s, cfg.gate, cfg.params));
    } catch (const std::exception& e) {
      build_err[s] = e.what();
    }
  }
  for (const auto& s : cfg.schemes)
    for (int i = 0; i < cfg.beta.n; ++i)
      for (int j = 0; j < cfg.epsilon.n; ++j) {
        SweepCell c;
        c.scheme = s;
        c.beta = cfg.beta.at(i);
        c.epsilon = cfg.epsilon.at(j);
        if (auto it = build_err.find(s); it != build_err.end()) c.error = it->second;
        res.cells.push_back(c);
      }
  parallel_for(static_cast<int>(res.cells.size()), cfg.workers, [&](int i) {
    auto& c = res.cells[i];
    if (c.error.empty()) evaluate_cell(c, sched.at(c.scheme), cfg);
  });
  const auto& tm = cfg.params.timing;
  res.metadata = {{"schemes", cfg.schemes},
                  {"gate", {{"gamma", cfg.gate.gamma}, {"theta", cfg.gate.theta}, {"phi", cfg.gate.phi}}},
                  {"beta", {{"lo", cfg.beta.lo}, {"hi", cfg.beta.hi}, {"n", cfg.beta.n}}},
                  {"epsilon", {{"lo", cfg.epsilon.lo}, {"hi", cfg.epsilon.hi}, {"n", cfg.epsilon.n}}},
                  {"integrator", {{"method", "rk4"}, {"steps_per_gate", tm.n_steps}}},
                  {"tau_ns", tm.tau()},
                  {"omega0_rad_per_ns", tm.omega0},
                  {"gamma1_rad_per_ns", cfg.noise.gamma1},
                  {"gamma2_rad_per_ns", cfg.noise.gamma2},
                  {"n_states", cfg.n_states},
                  {"failed_cells", res.failed()}};
  return res;
}

// 1-D sweep over beta at the first epsilon of the config
inline SweepResult robustness_sweep_beta(SweepConfig cfg) {
  cfg.epsilon = {cfg.epsilon.lo, cfg.epsilon.lo, 1};
  auto r = run_sweep(cfg);
  r.metadata["kind"] = "beta";
  return r;
}

inline SweepResult robustness_map_beta_epsilon(const SweepConfig& cfg) {
  auto r = run_sweep(cfg);
  r.metadata["kind"] = "beta_epsilon";
  return r;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "scheme,beta,epsilon,fidelity,leakage\n";
  for (const auto& c : r.cells)
    os << fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g}\n", c.scheme, c.beta, c.epsilon, c.fidelity, c.leakage);
}

// width of the contiguous beta interval around 0 where F > threshold,
// found by bisection on each side within [0, limit]
template <class FidelityOfBeta>
double threshold_width(FidelityOfBeta&& f, double threshold, double limit = 0.5, double tol = 1e-4) {
  auto edge = [&](double sign) {
    const double coarse = 0.01;
    double inside = 0.0;
    for (double b = coarse; b <= limit + 1e-12; b += coarse) {
      if (f(sign * b) <= threshold) {
        double lo = inside, hi = b;
        while (hi - lo > tol) {
          const double mid = 0.5 * (lo + hi);
          (f(sign * mid) > threshold ? lo : hi) = mid;
        }
        return lo;
      }
      inside = b;
    }
    return limit;
  };
  if (f(0.0) <= threshold) return 0.0;
  return edge(-1.0) + edge(1.0);
}

// fraction of map cells of a scheme with F > threshold
inline double area_fraction(const SweepResult& r, const std::string& scheme, double threshold) {
  int hit = 0, total = 0;
  for (const auto* c : r.for_scheme(scheme)) {
    ++total;
    if (c->error.empty() && c->fidelity > threshold) ++hit;
  }
  return total ? static_cast<double>(hit) / total : 0.0;
}

}  // namespace nhqc
