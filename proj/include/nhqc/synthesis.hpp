#pragma once

#include "core.hpp"
#include "gate.hpp"
#include "schedule.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace nhqc {

struct GateTiming {
  double T = 30.0;                   // ns, erf time scale
  double omega0 = two_pi * 0.05;     // rad/ns
  int n_steps = 10000;               // per gate
  double tau() const { return 4.0 * T; }
};

struct SSSPAnsatz {
  std::vector<double> a;  // a_1 .. a_N

  void validate() const {
    if (a.size() > 8) throw ConfigError("SSSP ansatz: at most 8 coefficients");
    for (double x : a)
      if (!std::isfinite(x)) throw ConfigError("SSSP ansatz: non-finite coefficient");
  }
};

inline SSSPAnsatz sssp3() { return {{-1.0, 0.0, 0.0}}; }
inline SSSPAnsatz sssp5() { return {{-2.4864, -0.74, 0.0}}; }
inline SSSPAnsatz sssp7() { return {{-3.46, -1.365, -0.5}}; }

// ---- design curves for the first interval, s in [0, L] ----

namespace legs {

struct ErfChi {
  double chi, chi_dot, chi_ddot, sin_chi, cos_chi, ec;
};

// chi = pi (erf(2s/T) + 1) written as pi (2 - erfc) so sin/cos stay exact near 2 pi
inline ErfChi erf_chi(double s, double T) {
  const double x = 2.0 * s / T;
  const double ec = std::erfc(x);
  const double cd = 4.0 * std::sqrt(pi) / T * std::exp(-x * x);
  return {pi * (2.0 - ec), cd, cd * (-8.0 * s / (T * T)), -std::sin(pi * ec), std::cos(pi * ec), ec};
}

inline TrajFn erf_leg(double T, double omega0) {
  return [T, omega0](double s) {
    const ErfChi c = erf_chi(s, T);
    return TrajPoint{c.chi, c.chi_dot, c.chi_ddot, c.sin_chi, c.cos_chi, omega0, 0.0};
  };
}

// f(chi) = 2 chi + sum a_n sin(2 n chi); f' = chi' f_chi
inline TrajFn sssp_leg(double T, SSSPAnsatz ansatz) {
  ansatz.validate();
  return [T, a = ansatz.a](double s) {
    const ErfChi c = erf_chi(s, T);
    double fc = 2.0, fcc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double n = static_cast<double>(k + 1);
      // 2 n chi = 4 n pi - 2 n pi ec
      const double arg = 2.0 * n * pi * c.ec;
      fc += 2.0 * n * a[k] * std::cos(arg);
      fcc += 4.0 * n * n * a[k] * std::sin(arg);
    }
    const double fd = c.chi_dot * fc;
    const double fdd = c.chi_ddot * fc + c.chi_dot * c.chi_dot * fcc;
    return TrajPoint{c.chi, c.chi_dot, c.chi_ddot, c.sin_chi, c.cos_chi, fd, fdd};
  };
}

// resonant sin^2 envelope of area pi over [0, L]
inline TrajFn sine_area_leg(double L) {
  return [L](double s) {
    const double w = two_pi * s / L;
    const double chi = pi + pi * (s / L - std::sin(w) / two_pi);
    const double cd = (pi / L) * (1.0 - std::cos(w));
    const double cdd = (pi / L) * (two_pi / L) * std::sin(w);
    return TrajPoint{chi, cd, cdd, std::sin(chi), std::cos(chi), 0.0, 0.0};
  };
}

// second interval: time reverse of the first with chi' and f' negated
inline TrajFn mirrored(TrajFn leg, double tau) {
  return [leg = std::move(leg), tau](double t) {
    TrajPoint p = leg(tau - t);
    p.chi_dot = -p.chi_dot;
    p.fdot = -p.fdot;
    return p;
  };
}

}  // namespace legs

// sampled chi on [0, tau], mirrored about tau/2
inline std::vector<double> chi_erf_profile(double T, double tau, const TimeGrid& grid) {
  grid.validate();
  if (std::abs(grid.t_start) > 1e-9 || std::abs(grid.t_end - tau) > 1e-9)
    throw ConfigError("chi_erf_profile: grid must span [0, tau]");
  std::vector<double> chi(grid.n_points());
  for (int k = 0; k < grid.n_points(); ++k) {
    const double t = grid.time(k);
    chi[k] = legs::erf_chi(t <= tau / 2 ? t : tau - t, T).chi;
  }
  return chi;
}

inline std::vector<double> sssp_phase_profile(const SSSPAnsatz& ansatz, const std::vector<double>& chi) {
  ansatz.validate();
  std::vector<double> f(chi.size());
  for (std::size_t k = 0; k < chi.size(); ++k) {
    double v = 2.0 * chi[k];
    for (std::size_t n = 0; n < ansatz.a.size(); ++n) v += ansatz.a[n] * std::sin(2.0 * (n + 1) * chi[k]);
    f[k] = v;
  }
  return f;
}

// second-order finite-difference derivative on a uniform grid
inline std::vector<double> grid_derivative(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) return d;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * h);
  d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
  d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
  return d;
}

// alpha = phi1 - atan2(chi', omega0 sin chi)
inline std::vector<double> alpha_from_chi(const std::vector<double>& chi, const std::vector<double>& phi1,
                                          double omega0, const TimeGrid& grid, Diagnostics* diag = nullptr) {
  if (!(omega0 > 0.0)) throw ConfigError("alpha_from_chi: omega0 must be > 0");
  if (chi.size() != static_cast<std::size_t>(grid.n_points()) || phi1.size() != chi.size())
    throw ConfigError("alpha_from_chi: sample count does not match grid");
  const auto cd = grid_derivative(chi, grid.dt());
  std::vector<double> alpha(chi.size());
  for (std::size_t k = 0; k < chi.size(); ++k) {
    const double y = cd[k], x = omega0 * std::sin(chi[k]);
    if (y == 0.0 && x == 0.0) {
      if (k == 0) {
        warn(diag, "alpha_from_chi: branch undetermined at first sample, using arctan(0)");
        alpha[k] = phi1[k];
      } else {
        alpha[k] = alpha[k - 1] + (phi1[k] - phi1[k - 1]);
      }
      continue;
    }
    alpha[k] = phi1[k] - std::atan2(y, x);
  }
  return alpha;
}

// ---- sampled inversion ----

struct SampledDrive {
  TimeGrid grid;
  std::vector<DriveSample> samples;
};

// chi' = Omega sin(phi1 - alpha); Delta = alpha' + chi' cot(chi) cot(phi1 - alpha)
// negative Omega is folded into phi1 + pi
inline SampledDrive synthesize_from_samples(const TimeGrid& grid, const std::vector<double>& chi,
                                            const std::vector<double>& alpha, const std::vector<double>& phi1) {
  grid.validate();
  const std::size_t n = grid.n_points();
  if (chi.size() != n || alpha.size() != n || phi1.size() != n)
    throw ConfigError("synthesize: sample count does not match grid");
  const auto cd = grid_derivative(chi, grid.dt());
  const auto ad = grid_derivative(alpha, grid.dt());
  SampledDrive out{grid, std::vector<DriveSample>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double psi = phi1[k] - alpha[k];
    const double sp = std::sin(psi), cp = std::cos(psi);
    const double sc = std::sin(chi[k]), cc = std::cos(chi[k]);
    double omega = 0.0, delta = ad[k];
    if (std::abs(cd[k]) > 1e-12) {
      if (std::abs(sp) < 1e-12)
        throw SynthesisError(fmt::format("singular inversion at t={:.6g} ns: sin(phi1-alpha)=0", grid.time(k)));
      omega = cd[k] / sp;
      if (std::abs(sc) > 1e-12)
        delta += cd[k] * cc * cp / (sc * sp);
      else if (std::abs(cp) > 1e-9)
        throw SynthesisError(fmt::format("singular inversion at t={:.6g} ns: sin(chi)=0", grid.time(k)));
    }
    double ph = phi1[k];
    if (omega < 0.0) {
      omega = -omega;
      ph += pi;
    }
    out.samples[k] = {omega, delta, ph};
  }
  return out;
}

// drive from samples; the complex amplitude and Delta are interpolated linearly
inline Segment sampled_segment(SampledDrive d, std::string label) {
  Segment s;
  s.t0 = d.grid.t_start;
  s.t1 = d.grid.t_end;
  s.n_steps = d.grid.n_steps;
  s.label = std::move(label);
  s.phi1 = d.samples.empty() ? 0.0 : d.samples.front().phi1;
  s.drive = [d = std::move(d)](double t) {
    const double x = (t - d.grid.t_start) / d.grid.dt();
    int k = static_cast<int>(std::floor(x));
    k = std::clamp(k, 0, d.grid.n_steps - 1);
    const double w = std::clamp(x - k, 0.0, 1.0);
    const auto& a = d.samples[k];
    const auto& b = d.samples[k + 1];
    const cplx za = a.omega * std::exp(I * a.phi1), zb = b.omega * std::exp(I * b.phi1);
    const cplx z = (1.0 - w) * za + w * zb;
    const double om = std::abs(z);
    return DriveSample{om, (1.0 - w) * a.delta + w * b.delta, om > 0.0 ? std::arg(z) : a.phi1};
  };
  return s;
}

// ---- two-interval schedules ----

inline PulseSchedule two_leg_schedule(std::string scheme, const MixingAngles& mix, const TrajFn& leg, double tau,
                                      double gamma1, double gamma2, int n_steps, double omega_ref) {
  if (n_steps < 4) throw ConfigError("two-interval schedule needs n_steps >= 4");
  PulseSchedule p;
  p.scheme = std::move(scheme);
  p.mix = mix;
  p.omega_ref = omega_ref;
  const int half = n_steps / 2;
  p.segments.push_back(trajectory_segment(0.0, tau / 2, half, leg, gamma1, pi / 2, "leg1"));
  p.segments.push_back(trajectory_segment(tau / 2, tau, n_steps - half, legs::mirrored(leg, tau), gamma2, -pi / 2,
                                          "leg2"));
  return p;
}

// the mirrored leg carries a sign fold, hence the extra pi on gamma2
inline double loop_gamma2(const GateSpec& g, double gamma1 = 0.0) { return gamma1 + g.gamma + pi; }

inline PulseSchedule two_interval_gate(const GateSpec& g, const GateTiming& tm, const SSSPAnsatz* ansatz = nullptr,
                                       double gamma1 = 0.0) {
  if (!(tm.T > 0.0) || !(tm.omega0 > 0.0)) throw ConfigError("two_interval_gate: T and omega0 must be > 0");
  if (ansatz) {
    TrajFn leg = legs::sssp_leg(tm.T, *ansatz);
    return two_leg_schedule("NHQC+SSSP", mixing_for(g), leg, tm.tau(), gamma1, loop_gamma2(g, gamma1), tm.n_steps,
                            tm.omega0);
  }
  return two_leg_schedule("NHQC+", mixing_for(g), legs::erf_leg(tm.T, tm.omega0), tm.tau(), gamma1,
                          loop_gamma2(g, gamma1), tm.n_steps, tm.omega0);
}

inline PulseSchedule synthesize_sssp_schedule(const GateSpec& g, const SSSPAnsatz& ansatz, const GateTiming& tm) {
  return two_interval_gate(g, tm, &ansatz);
}

inline PulseSchedule nhqc_baseline_schedule(const GateSpec& g, double tau, int n_steps, double omega_ref) {
  if (!(tau > 0.0)) throw ConfigError("nhqc baseline: tau must be > 0");
  return two_leg_schedule("NHQC", mixing_for(g), legs::sine_area_leg(tau / 2), tau, 0.0, loop_gamma2(g), n_steps,
                          omega_ref);
}

// ---- KDD ----

struct KDDPulse {
  double t_center;
  double phase;
};

struct KDDSequence {
  double tau_total = 120.0;
  double tau_pi = 1.2;
  std::vector<KDDPulse> pulses;
  double tau_free() const { return (tau_total - 20.0 * tau_pi) / 20.0; }
};

inline constexpr std::array<double, 5> kdd_block_phases{pi / 6, 0.0, pi / 2, 0.0, pi / 6};

// [KDD_eta, KDD_eta+pi/2, KDD_eta, KDD_eta+pi/2], 20 pulses
inline KDDSequence kdd_layout(double eta, double tau_total, double tau_pi) {
  KDDSequence seq{tau_total, tau_pi, {}};
  if (!(tau_pi > 0.0)) throw ConfigError("KDD: tau_pi must be > 0");
  const double tf = seq.tau_free();
  if (!(tf > 0.0) || tau_pi >= tf)
    throw ConfigError(fmt::format("KDD: tau_pi={} must be shorter than the free evolution ({})", tau_pi, tf));
  const std::array<double, 4> offs{eta, eta + pi / 2, eta, eta + pi / 2};
  const double block = tau_total / 4;
  for (int b = 0; b < 4; ++b) {
    double t = b * block + tf / 2 + tau_pi / 2;
    for (double ph : kdd_block_phases) {
      seq.pulses.push_back({t, ph + offs[b]});
      t += tau_pi + tf;
    }
  }
  return seq;
}

namespace legs {

// k-th pole-to-pole pulse: chi = pi (k+1) + (pi/2)(1 + sin(pi (t - tc)/tau_pi))
inline TrajFn kdd_pulse_leg(int k, double tc, double tau_pi) {
  return [k, tc, tau_pi](double t) {
    const double x = std::clamp(pi * (t - tc) / tau_pi, -pi / 2, pi / 2);
    const double d = (pi / 2) * (1.0 + std::sin(x));
    const double sgn = (k % 2 == 0) ? -1.0 : 1.0;  // sin/cos of pi (k+1)
    const double cd = (pi * pi / (2.0 * tau_pi)) * std::cos(x);
    const double cdd = -(pi * pi * pi / (2.0 * tau_pi * tau_pi)) * std::sin(x);
    return TrajPoint{pi * (k + 1) + d, cd, cdd, sgn * std::sin(d), sgn * std::cos(d), 0.0, 0.0};
  };
}

inline TrajFn pole_hold(int k) {
  return [k](double) {
    const double sgn = (k % 2 == 0) ? -1.0 : 1.0;
    return TrajPoint{pi * (k + 1), 0.0, 0.0, 0.0, sgn, 0.0, 0.0};
  };
}

}  // namespace legs

inline PulseSchedule build_kdd_sequence(const KDDSequence& seq, const MixingAngles& mix, double omega_ref,
                                        int steps_per_pulse = 400, int steps_per_free = 8) {
  if (seq.pulses.size() != 20) throw ConfigError("KDD: expected 20 pulses");
  PulseSchedule p;
  p.scheme = "NHQC+KDD";
  p.mix = mix;
  p.omega_ref = omega_ref;
  double t = 0.0;
  for (std::size_t k = 0; k < seq.pulses.size(); ++k) {
    const auto& pl = seq.pulses[k];
    const double a = pl.t_center - seq.tau_pi / 2, b = pl.t_center + seq.tau_pi / 2;
    if (a < t - 1e-12) throw ConfigError("KDD: overlapping pulses");
    if (a > t + 1e-12)
      p.segments.push_back(trajectory_segment(t, a, steps_per_free, legs::pole_hold(static_cast<int>(k)),
                                              pl.phase, pi / 2, "free"));
    p.segments.push_back(trajectory_segment(a, b, steps_per_pulse,
                                            legs::kdd_pulse_leg(static_cast<int>(k), pl.t_center, seq.tau_pi),
                                            pl.phase, pi / 2, fmt::format("pi{}", k)));
    t = b;
  }
  if (seq.tau_total > t + 1e-12)
    p.segments.push_back(trajectory_segment(t, seq.tau_total, steps_per_free, legs::pole_hold(20),
                                            seq.pulses.back().phase, pi / 2, "free"));
  return p;
}

inline PulseSchedule build_kdd_sequence(double eta, double tau_total, double tau_pi, const MixingAngles& mix,
                                        double omega_ref) {
  return build_kdd_sequence(kdd_layout(eta, tau_total, tau_pi), mix, omega_ref);
}

// single pi pulse |Phi> -> |e> with drive phase eta
inline PulseSchedule kdd_pi_pulse(double eta, double tau_pi, const MixingAngles& mix, int n_steps = 400) {
  if (!(tau_pi > 0.0)) throw ConfigError("KDD: tau_pi must be > 0");
  PulseSchedule p;
  p.scheme = "KDD-pi";
  p.mix = mix;
  p.segments.push_back(
      trajectory_segment(0.0, tau_pi, n_steps, legs::kdd_pulse_leg(0, tau_pi / 2, tau_pi), eta, pi / 2, "pi"));
  return p;
}

// ---- dynamical (AC-Stark) baseline ----

namespace detail {

inline double dg_phase(const PulseSchedule& p) {
  const Operator u = propagate_schedule(p);
  const StateVector b = p.bright();
  const StateVector d = dark_state(p.mix);
  return std::arg(b.dot(u * b) / d.dot(u * d));
}

inline PulseSchedule dg_with_peak(const GateSpec& g, double tau, double ratio, double peak, int n_steps,
                                  double omega_ref) {
  PulseSchedule p;
  p.scheme = "DG";
  p.mix = mixing_for(g);
  p.omega_ref = omega_ref;
  Segment s;
  s.t0 = 0.0;
  s.t1 = tau;
  s.n_steps = n_steps;
  s.label = "stark";
  s.drive = [tau, ratio, peak](double t) {
    const double e = std::sin(pi * t / tau);
    return DriveSample{peak * e * e, ratio * peak, 0.0};
  };
  p.segments.push_back(std::move(s));
  return p;
}

}  // namespace detail

// far-detuned sin^2 pulse; the bright state picks up the light-shift phase gamma
// while the dark state is untouched. Delta = ratio * peak Omega.
inline PulseSchedule dg_baseline_schedule(const GateSpec& g, double tau, int n_steps, double omega_ref,
                                          double ratio = 2.0) {
  if (!(tau > 0.0) || !(ratio > 0.0)) throw ConfigError("DG: tau and detuning ratio must be > 0");
  double target = std::fmod(g.gamma, two_pi);
  if (target < 0.0) target += two_pi;
  if (target < 1e-12) return detail::dg_with_peak(g, tau, ratio, 0.0, n_steps, omega_ref);
  // adiabatic light shift is linear in the peak: phase = peak * J
  double j = 0.0;
  const int nq = 4000;
  for (int k = 0; k < nq; ++k) {
    const double e = std::sin(pi * (k + 0.5) / nq);
    j += 0.5 * (std::sqrt(ratio * ratio + e * e * e * e) - ratio);
  }
  j *= tau / nq;
  double x0 = target / j;
  auto resid = [&](double peak) {
    return wrap_angle(detail::dg_phase(detail::dg_with_peak(g, tau, ratio, peak, n_steps, omega_ref)) - target);
  };
  double r0 = resid(x0);
  double x1 = x0 * (1.0 - 0.02), r1 = resid(x1);
  for (int it = 0; it < 20 && std::abs(r1) > 1e-10; ++it) {
    if (r1 == r0) break;
    const double x2 = x1 - r1 * (x1 - x0) / (r1 - r0);
    x0 = x1;
    r0 = r1;
    x1 = x2;
    r1 = resid(x1);
  }
  if (std::abs(r1) > 1e-6) throw SynthesisError("DG: light-shift phase did not converge");
  return detail::dg_with_peak(g, tau, ratio, x1, n_steps, omega_ref);
}

}  // namespace nhqc
