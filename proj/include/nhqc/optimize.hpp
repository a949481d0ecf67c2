#pragma once

#include "core.hpp"
#include "holonomy.hpp"
#include "sensitivity.hpp"
#include "synthesis.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <limits>
#include <memory>
#include <random>
#include <vector>

namespace nhqc {

struct OptimizeOptions {
  int max_iterations = 500;
  int n_seeds = 5;
  std::uint64_t seed = 12345;
  double seed_spread = 0.5;      // std-dev of the restart perturbations
  double gate_tolerance = 1e-3;  // operator distance at beta = 0
  double penalty = 1e3;
  double initial_step = 0.5;
  double size_tol = 1e-6;
  int n_steps = 2000;  // propagation grid used inside the loop
};

struct OptimizeResult {
  SSSPAnsatz best;
  double qs = 0.0;
  double qs_initial = 0.0;
  double gate_distance = 0.0;
  bool feasible = false;
  double violation = 0.0;  // max(0, distance - tolerance) of the returned point
  int evaluations = 0;
  std::vector<SSSPAnsatz> seeds;
};

struct SsspCandidate {
  double qs = 0.0;
  double distance = 0.0;
};

inline SsspCandidate evaluate_sssp(const SSSPAnsatz& a, const GateSpec& g, GateTiming tm) {
  const auto p = synthesize_sssp_schedule(g, a, tm);
  const auto eg = extract_gate(propagate_schedule(p));
  return {qs_sensitivity(p), operator_distance(eg.gate, target_unitary(g))};
}

namespace detail {

struct NmContext {
  const GateSpec* gate;
  GateTiming timing;
  const OptimizeOptions* opt;
  int evaluations = 0;
};

inline double nm_objective(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<NmContext*>(params);
  SSSPAnsatz a;
  for (std::size_t k = 0; k < x->size; ++k) a.a.push_back(gsl_vector_get(x, k));
  ++ctx->evaluations;
  try {
    const auto c = evaluate_sssp(a, *ctx->gate, ctx->timing);
    const double v = std::max(0.0, c.distance - ctx->opt->gate_tolerance);
    return c.qs + ctx->opt->penalty * v;
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct GslMinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct GslVectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

inline std::vector<double> nelder_mead(NmContext& ctx, const std::vector<double>& x0) {
  const std::size_t n = x0.size();
  std::unique_ptr<gsl_vector, GslVectorDeleter> x(gsl_vector_alloc(n)), step(gsl_vector_alloc(n));
  for (std::size_t k = 0; k < n; ++k) {
    gsl_vector_set(x.get(), k, x0[k]);
    gsl_vector_set(step.get(), k, ctx.opt->initial_step);
  }
  gsl_multimin_function fn{&nm_objective, n, &ctx};
  std::unique_ptr<gsl_multimin_fminimizer, GslMinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
  for (int it = 0; it < ctx.opt->max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), ctx.opt->size_tol) == GSL_SUCCESS) break;
  }
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = gsl_vector_get(m->x, k);
  return out;
}

}  // namespace detail

// Nelder-Mead over a_1..a_n minimizing Q_s with a penalty on the gate error,
// restarted from the initial point plus (n_seeds - 1) perturbed copies.
inline OptimizeResult optimize_sssp_coeffs(int n_terms, const GateSpec& g, const SSSPAnsatz& initial,
                                           GateTiming tm = {}, const OptimizeOptions& opt = {}) {
  if (n_terms < 1 || n_terms > 8) throw ConfigError("optimize: n_terms must be in [1, 8]");
  if (opt.n_seeds < 1 || opt.max_iterations < 1) throw ConfigError("optimize: need at least one seed and iteration");
  initial.validate();
  gsl_set_error_handler_off();
  std::vector<double> x0(n_terms, 0.0);
  for (int k = 0; k < n_terms && k < static_cast<int>(initial.a.size()); ++k) x0[k] = initial.a[k];

  GateTiming inner = tm;
  inner.n_steps = opt.n_steps;
  detail::NmContext ctx{&g, inner, &opt};

  OptimizeResult res;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd(0.0, opt.seed_spread);
  for (int s = 0; s < opt.n_seeds; ++s) {
    SSSPAnsatz a{x0};
    if (s > 0)
      for (auto& v : a.a) v += nd(rng);
    res.seeds.push_back(a);
  }

  auto score = [&](const SsspCandidate& c) {
    return c.qs + opt.penalty * std::max(0.0, c.distance - opt.gate_tolerance);
  };
  const SsspCandidate c0 = evaluate_sssp(SSSPAnsatz{x0}, g, tm);
  res.qs_initial = c0.qs;
  res.best = SSSPAnsatz{x0};
  res.qs = c0.qs;
  res.gate_distance = c0.distance;
  double best_score = score(c0);
  for (const auto& s : res.seeds) {
    const auto x = detail::nelder_mead(ctx, s.a);
    const SSSPAnsatz cand{x};
    const SsspCandidate c = evaluate_sssp(cand, g, tm);
    const double sc = score(c);
    if (sc < best_score) {
      best_score = sc;
      res.best = cand;
      res.qs = c.qs;
      res.gate_distance = c.distance;
    }
  }
  res.evaluations = ctx.evaluations;
  res.violation = std::max(0.0, res.gate_distance - opt.gate_tolerance);
  res.feasible = res.violation == 0.0;
  return res;
}

}  // namespace nhqc
