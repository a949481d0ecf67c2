#pragma once

#include "core.hpp"
#include "gate.hpp"
#include "lambda_system.hpp"
#include "propagate.hpp"
#include "schedule.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace nhqc {

// ---- auxiliary basis ----

inline StateVector mu_plus(double chi, double alpha, const StateVector& bright) {
  return std::sin(chi / 2) * bright + std::cos(chi / 2) * std::exp(-I * alpha) * ket(ke);
}

inline StateVector mu_minus(double chi, double alpha, const StateVector& bright) {
  return std::cos(chi / 2) * bright - std::sin(chi / 2) * std::exp(-I * alpha) * ket(ke);
}

struct TrajectoryPiece {
  TimeGrid grid;
  std::vector<double> chi, chi_dot, alpha, f;
};

// one piece per schedule segment, same grids
struct AuxiliaryTrajectory {
  std::vector<TrajectoryPiece> pieces;
  MixingAngles mix;
};

// Samples the design curve of every segment. f is the relative phase between
// mu+ and mu-: integral of f' inside segments plus the gauge jump at each
// boundary, so that e^{-if} is continuous along the true evolution.
inline AuxiliaryTrajectory auxiliary_trajectory(const PulseSchedule& p) {
  if (!p.geometric()) throw ConfigError("schedule '" + p.scheme + "' has no auxiliary trajectory");
  AuxiliaryTrajectory tr;
  tr.mix = p.mix;
  const StateVector b = p.bright();
  double f_carry = 0.0;
  StateVector last_p, last_m;
  for (std::size_t s = 0; s < p.segments.size(); ++s) {
    const auto& seg = p.segments[s];
    TrajectoryPiece pc;
    pc.grid = seg.grid();
    const int n = pc.grid.n_points();
    pc.chi.resize(n);
    pc.chi_dot.resize(n);
    pc.alpha.resize(n);
    pc.f.resize(n);
    std::vector<double> fd(n);
    for (int k = 0; k < n; ++k) {
      const double t = pc.grid.time(k);
      const TrajPoint q = seg.traj(t);
      pc.chi[k] = q.chi;
      pc.chi_dot[k] = q.chi_dot;
      pc.alpha[k] = seg.phi1 - psi_of(q, seg.psi_hold);
      fd[k] = q.fdot;
    }
    if (s > 0) {
      const StateVector np = mu_plus(pc.chi[0], pc.alpha[0], b);
      const StateVector nm = mu_minus(pc.chi[0], pc.alpha[0], b);
      const double jp = std::arg(np.dot(last_p)), jm = std::arg(nm.dot(last_m));
      f_carry -= (jp - jm);
    }
    pc.f[0] = f_carry;
    const double h = pc.grid.dt();
    for (int k = 1; k < n; ++k) pc.f[k] = pc.f[k - 1] + 0.5 * h * (fd[k - 1] + fd[k]);
    f_carry = pc.f[n - 1];
    last_p = mu_plus(pc.chi[n - 1], pc.alpha[n - 1], b);
    last_m = mu_minus(pc.chi[n - 1], pc.alpha[n - 1], b);
    tr.pieces.push_back(std::move(pc));
  }
  return tr;
}

inline void check_shared_grid(const PulseSchedule& p, const AuxiliaryTrajectory& tr) {
  if (p.segments.size() != tr.pieces.size()) throw ConfigError("schedule and trajectory have different pieces");
  for (std::size_t s = 0; s < tr.pieces.size(); ++s) {
    const auto a = p.segments[s].grid();
    const auto& b = tr.pieces[s].grid;
    if (a.n_steps != b.n_steps || std::abs(a.t_start - b.t_start) > 1e-12 || std::abs(a.t_end - b.t_end) > 1e-12)
      throw ConfigError("schedule and trajectory grids differ");
  }
}

namespace detail {

// fourth-order derivative on a uniform grid (central inside, one-sided at the ends)
template <class V>
std::vector<V> deriv4(const std::vector<V>& y, double h) {
  const std::size_t n = y.size();
  std::vector<V> d(n);
  if (n < 5) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 < n ? k + 1 : n - 1;
      d[k] = (y[b] - y[a]) / ((b - a) * h);
    }
    return d;
  }
  for (std::size_t k = 2; k + 2 < n; ++k) d[k] = (y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]) / (12.0 * h);
  d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
  d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h);
  d[n - 1] = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5]) / (12.0 * h);
  d[n - 2] = (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] + 6.0 * y[n - 4] - y[n - 5]) / (12.0 * h);
  return d;
}

}  // namespace detail

// ---- verifiers ----

struct Residual {
  double value = 0.0;  // max over the grid
  double scale = 0.0;  // max |H| entry over the grid
  double relative() const { return scale > 0.0 ? value / scale : value; }
};

inline Residual verify_von_neumann(const PulseSchedule& p, const AuxiliaryTrajectory& tr) {
  check_shared_grid(p, tr);
  const StateVector b = p.bright();
  Residual r;
  for (std::size_t s = 0; s < tr.pieces.size(); ++s) {
    const auto& pc = tr.pieces[s];
    const int n = pc.grid.n_points();
    std::vector<Operator> proj(n);
    for (int k = 0; k < n; ++k) proj[k] = projector(mu_plus(pc.chi[k], pc.alpha[k], b));
    const auto dproj = detail::deriv4(proj, pc.grid.dt());
    for (int k = 0; k < n; ++k) {
      const Operator h = hamiltonian_bright(p.segments[s].drive(pc.grid.time(k)), b);
      r.scale = std::max(r.scale, max_abs(h));
      r.value = std::max(r.value, max_abs(dproj[k] + I * (h * proj[k] - proj[k] * h)));
    }
  }
  return r;
}

// max off-diagonal of <mu_m(t)|H|mu_k(t)> - i <mu_m(t)|d mu_k/dt>
inline Residual verify_diagonality(const PulseSchedule& p, const AuxiliaryTrajectory& tr) {
  check_shared_grid(p, tr);
  const StateVector b = p.bright();
  const StateVector d0 = dark_state(p.mix);
  Residual r;
  for (std::size_t s = 0; s < tr.pieces.size(); ++s) {
    const auto& pc = tr.pieces[s];
    const int n = pc.grid.n_points();
    std::vector<Operator> basis(n);
    for (int k = 0; k < n; ++k) {
      basis[k].col(0) = d0;
      basis[k].col(1) = mu_plus(pc.chi[k], pc.alpha[k], b);
      basis[k].col(2) = mu_minus(pc.chi[k], pc.alpha[k], b);
    }
    const auto dbasis = detail::deriv4(basis, pc.grid.dt());
    for (int k = 0; k < n; ++k) {
      const Operator h = hamiltonian_bright(p.segments[s].drive(pc.grid.time(k)), b);
      r.scale = std::max(r.scale, max_abs(h));
      Operator m = basis[k].adjoint() * h * basis[k] - I * basis[k].adjoint() * dbasis[k];
      m.diagonal().setZero();
      r.value = std::max(r.value, max_abs(m));
    }
  }
  return r;
}

struct PhaseDecomposition {
  double dynamical = 0.0;
  double geometric = 0.0;  // wrapped to [0, 2 pi)
  std::vector<double> dynamical_pieces;
  std::vector<double> geometric_pieces;
};

// dynamical: trapezoid of <mu+|H|mu+>; geometric: discrete overlap product
// (gauge-invariant form of i * integral <mu+|d mu+>), including the closure
inline PhaseDecomposition accumulated_phases(const PulseSchedule& p, const AuxiliaryTrajectory& tr) {
  check_shared_grid(p, tr);
  const StateVector b = p.bright();
  PhaseDecomposition out;
  CompensatedSum dyn, geo;
  StateVector first, prev;
  bool have_prev = false;
  for (std::size_t s = 0; s < tr.pieces.size(); ++s) {
    const auto& pc = tr.pieces[s];
    const int n = pc.grid.n_points();
    const double h = pc.grid.dt();
    CompensatedSum dp, gp;
    double e_prev = 0.0;
    for (int k = 0; k < n; ++k) {
      const StateVector m = mu_plus(pc.chi[k], pc.alpha[k], b);
      const Operator hk = hamiltonian_bright(p.segments[s].drive(pc.grid.time(k)), b);
      const double e = std::real(m.dot(hk * m));
      if (k > 0) dp.add(0.5 * h * (e_prev + e));
      e_prev = e;
      if (have_prev) gp.add(-std::arg(prev.dot(m)));
      else first = m;
      prev = m;
      have_prev = true;
    }
    out.dynamical_pieces.push_back(dp.value());
    out.geometric_pieces.push_back(gp.value());
    dyn.add(dp.value());
    geo.add(gp.value());
  }
  geo.add(-std::arg(prev.dot(first)));
  out.dynamical = dyn.value();
  double g = std::fmod(geo.value(), two_pi);
  out.geometric = g < 0.0 ? g + two_pi : g;
  return out;
}

// ---- gate extraction ----

struct ExtractedGate {
  Qubit2 gate;
  double leakage = 0.0;
};

inline ExtractedGate extract_gate(const Operator& u) {
  ExtractedGate g;
  g.gate = u.topLeftCorner<2, 2>();
  Eigen::JacobiSVD<Qubit2> svd(g.gate);
  const double smin = svd.singularValues().minCoeff();
  g.leakage = std::max(0.0, 1.0 - smin * smin);
  return g;
}

inline double cyclicity_deviation(const Operator& u, const PulseSchedule& p, const AuxiliaryTrajectory& tr) {
  const StateVector b = p.bright();
  const auto& pc = tr.pieces.front();
  const StateVector m = mu_plus(pc.chi[0], pc.alpha[0], b);
  return 1.0 - std::abs(m.dot(u * m));
}

inline double dark_deviation(const Operator& u, const MixingAngles& mix) {
  const StateVector d = dark_state(mix);
  return 1.0 - std::abs(d.dot(u * d));
}

// ---- fidelity ----

inline StateVector theta_state(double th) {
  StateVector v;
  v << std::cos(th), std::sin(th), 0.0;
  return v;
}

inline double theta_at(int j, int n) { return n == 1 ? 0.0 : (pi / 2) * j / (n - 1); }

inline double average_fidelity_unitary(const Operator& u, const Operator& target, int n_states) {
  CompensatedSum acc;
  for (int j = 0; j < n_states; ++j) {
    const StateVector psi = theta_state(theta_at(j, n_states));
    acc.add(std::norm((target * psi).dot(u * psi)));
  }
  return acc.value() / n_states;
}

inline double average_fidelity_channel(const Superop& s, const Operator& target, int n_states) {
  CompensatedSum acc;
  for (int j = 0; j < n_states; ++j) {
    const StateVector psi = theta_state(theta_at(j, n_states));
    acc.add(state_fidelity(target * psi, apply_superop(s, psi * psi.adjoint())));
  }
  return acc.value() / n_states;
}

inline bool has_decoherence(const NoiseModel& n) { return n.gamma1 > 0.0 || n.gamma2 > 0.0; }

inline Superop propagate_schedule_channel(const PulseSchedule& p, const NoiseModel& noise) {
  const auto ops = collapse_operators(noise);
  Superop s = Superop::Identity();
  for (const auto& seg : p.segments) s = propagate_superop(segment_hamiltonian(p, seg, noise), ops, seg.grid()) * s;
  return s;
}

inline double average_gate_fidelity(const PulseSchedule& p, const GateSpec& g, const NoiseModel& noise,
                                    int n_states = 1001) {
  if (n_states < 1) throw ConfigError("n_states must be >= 1");
  const Operator target = embed(target_unitary(g));
  if (!has_decoherence(noise)) return average_fidelity_unitary(propagate_schedule(p, noise), target, n_states);
  return average_fidelity_channel(propagate_schedule_channel(p, noise), target, n_states);
}

struct FidelityCurve {
  std::vector<double> t_over_tau;
  std::vector<double> fidelity;
};

// F(t) = mean <psi_ideal(t)| rho(t) |psi_ideal(t)>, ideal = noise-free evolution;
// sampled at the first grid point at or after each of n_points equally spaced times
inline FidelityCurve fidelity_curve(const PulseSchedule& p, const NoiseModel& noise, int n_states = 1001,
                                    int n_points = 101) {
  const auto ops = collapse_operators(noise);
  const double t0 = p.t_start(), dur = p.duration();
  FidelityCurve c;
  std::vector<StateVector> psis;
  for (int j = 0; j < n_states; ++j) psis.push_back(theta_state(theta_at(j, n_states)));
  Operator u_ideal = Operator::Identity();
  Superop s_noisy = Superop::Identity();
  int next = 0;
  auto record = [&](double t, const Operator& u, const Superop& s) {
    while (next < n_points && t >= t0 + dur * next / (n_points - 1) - 1e-9) {
      CompensatedSum acc;
      for (const auto& psi : psis) acc.add(state_fidelity(u * psi, apply_superop(s, psi * psi.adjoint())));
      c.t_over_tau.push_back((t - t0) / dur);
      c.fidelity.push_back(acc.value() / n_states);
      ++next;
    }
  };
  for (const auto& seg : p.segments) {
    std::vector<Operator> us;
    propagate_schrodinger(segment_hamiltonian(p, seg, NoiseModel{}), seg.grid(),
                          [&](int, double, const Operator& u) { us.push_back(u); });
    const Operator u_base = u_ideal;
    const Superop s_base = s_noisy;
    Superop s_last = Superop::Identity();
    propagate_superop(segment_hamiltonian(p, seg, noise), ops, seg.grid(), [&](int k, double t, const Superop& s) {
      record(t, us[k] * u_base, s * s_base);
      s_last = s;
    });
    u_ideal = us.back() * u_base;
    s_noisy = s_last * s_base;
  }
  return c;
}

// ---- combined report ----

struct VerifierLimits {
  double residual_rel = 1e-5;
  double offdiag_rel = 1e-5;
  double dyn_phase = 1e-3;
  double cyclicity = 1e-4;
  double gate_distance = 1e-3;
  double leakage = 1e-4;
};

struct VerifierReport {
  double residual_von_neumann = 0.0;
  double max_offdiag = 0.0;
  double h_scale = 0.0;
  double dyn_phase = 0.0;
  double geo_phase = 0.0;
  double leakage = 0.0;
  double fidelity = 0.0;
  double gate_distance = 0.0;
  double cyclicity = 0.0;
  double dark = 0.0;
  bool geometric = true;

  std::vector<std::string> failures(const VerifierLimits& lim = {}) const {
    std::vector<std::string> f;
    if (geometric) {
      if (residual_von_neumann > lim.residual_rel * h_scale) f.push_back("von Neumann residual");
      if (max_offdiag > lim.offdiag_rel * h_scale) f.push_back("effective Hamiltonian not diagonal");
      if (std::abs(dyn_phase) > lim.dyn_phase) f.push_back("dynamical phase");
      if (cyclicity > lim.cyclicity) f.push_back("cyclicity");
    }
    if (gate_distance > lim.gate_distance) f.push_back("gate distance");
    if (leakage > lim.leakage) f.push_back("leakage");
    return f;
  }
  bool passed(const VerifierLimits& lim = {}) const { return failures(lim).empty(); }
};

inline void to_json(nlohmann::json& j, const VerifierReport& r) {
  j = nlohmann::json{{"residual_von_neumann", r.residual_von_neumann},
                     {"max_offdiag", r.max_offdiag},
                     {"dyn_phase", r.dyn_phase},
                     {"geo_phase", r.geo_phase},
                     {"leakage", r.leakage},
                     {"fidelity", r.fidelity},
                     {"h_scale", r.h_scale},
                     {"gate_distance", r.gate_distance},
                     {"cyclicity", r.cyclicity},
                     {"geometric", r.geometric}};
}

inline VerifierReport verify_schedule(const PulseSchedule& p, const GateSpec& g, int n_states = 1001) {
  VerifierReport r;
  const Operator u = propagate_schedule(p);
  const auto eg = extract_gate(u);
  r.leakage = eg.leakage;
  r.gate_distance = operator_distance(eg.gate, target_unitary(g));
  r.fidelity = average_fidelity_unitary(u, embed(target_unitary(g)), n_states);
  r.dark = dark_deviation(u, p.mix);
  r.geometric = p.geometric();
  if (r.geometric) {
    const auto tr = auxiliary_trajectory(p);
    const auto vn = verify_von_neumann(p, tr);
    const auto od = verify_diagonality(p, tr);
    const auto ph = accumulated_phases(p, tr);
    r.residual_von_neumann = vn.value;
    r.max_offdiag = od.value;
    r.h_scale = vn.scale;
    r.dyn_phase = ph.dynamical;
    r.geo_phase = ph.geometric;
    r.cyclicity = cyclicity_deviation(u, p, tr);
  } else {
    const StateVector b = p.bright();
    r.h_scale = 0.0;
    double ph = std::arg(b.dot(u * b));
    r.dyn_phase = ph < 0.0 ? ph + two_pi : ph;
  }
  return r;
}

// scales Delta(t) of every segment; used to inject verifier failures
inline PulseSchedule corrupt_detuning(PulseSchedule p, double factor) {
  for (auto& s : p.segments)
    s.drive = [d = s.drive, factor](double t) {
      DriveSample x = d(t);
      x.delta *= factor;
      return x;
    };
  return p;
}

}  // namespace nhqc
