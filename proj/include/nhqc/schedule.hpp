#pragma once

#include "core.hpp"
#include "lambda_system.hpp"

#include <fmt/format.h>

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nhqc {

// Local state of the design curve. chi and its derivatives, sin/cos of chi
// (kept separately so they stay exact near the poles), and the relative phase
// rate fdot = d f/dt with its derivative.
struct TrajPoint {
  double chi = pi;
  double chi_dot = 0.0;
  double chi_ddot = 0.0;
  double sin_chi = 0.0;
  double cos_chi = -1.0;
  double fdot = 0.0;
  double fddot = 0.0;
};

using TrajFn = std::function<TrajPoint(double)>;
using DriveFn = std::function<DriveSample(double)>;

struct Segment {
  double t0 = 0.0;
  double t1 = 0.0;
  int n_steps = 2;
  DriveFn drive;
  TrajFn traj;            // empty for non-geometric segments
  double phi1 = 0.0;      // constant drive phase of the segment
  double psi_hold = pi / 2;  // psi when chi_dot and u both vanish
  std::string label;

  TimeGrid grid() const { return {t0, t1, n_steps}; }
  double duration() const { return t1 - t0; }
};

struct PulseSchedule {
  std::string scheme;
  MixingAngles mix;
  std::vector<Segment> segments;
  double omega_ref = 0.0;  // scale for the static detuning error

  double t_start() const { return segments.empty() ? 0.0 : segments.front().t0; }
  double t_end() const { return segments.empty() ? 0.0 : segments.back().t1; }
  double duration() const { return t_end() - t_start(); }
  int total_steps() const {
    int n = 0;
    for (const auto& s : segments) n += s.n_steps;
    return n;
  }
  bool geometric() const {
    if (segments.empty()) return false;
    for (const auto& s : segments)
      if (!s.traj) return false;
    return true;
  }
  // segment holding t; right-continuous at interior boundaries
  const Segment& segment_at(double t) const {
    for (std::size_t k = 0; k + 1 < segments.size(); ++k)
      if (t < segments[k].t1) return segments[k];
    return segments.back();
  }
  DriveSample sample(double t) const { return segment_at(t).drive(t); }
  StateVector bright() const { return bright_state(mix); }
};

struct TimedSample {
  double t;
  DriveSample s;
};

// samples on the concatenated segment grids; a shared boundary is written once
// with the value of the segment that starts there
inline std::vector<TimedSample> sample_schedule(const PulseSchedule& p) {
  std::vector<TimedSample> out;
  for (std::size_t k = 0; k < p.segments.size(); ++k) {
    const auto& seg = p.segments[k];
    const TimeGrid g = seg.grid();
    const bool last = k + 1 == p.segments.size();
    const int stop = last ? g.n_steps : g.n_steps - 1;
    for (int j = 0; j <= stop; ++j) out.push_back({g.time(j), seg.drive(g.time(j))});
  }
  return out;
}

inline void write_schedule_csv(std::ostream& os, const PulseSchedule& p) {
  os << "t_ns,omega,delta,phi1\n";
  for (const auto& [t, s] : sample_schedule(p))
    os << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g}\n", t, s.omega, s.delta, s.phi1);
}

// Drive from the design curve for a segment with constant phi1.
//   u = sin(chi) f', Omega = sqrt(chi'^2 + u^2), psi = atan2(chi', u),
//   alpha = phi1 - psi, Delta = -psi' + f' cos(chi)
inline DriveSample drive_from_point(const TrajPoint& p, double phi1) {
  const double u = p.sin_chi * p.fdot;
  const double ud = p.cos_chi * p.chi_dot * p.fdot + p.sin_chi * p.fddot;
  const double r2 = p.chi_dot * p.chi_dot + u * u;
  const double psi_dot = r2 > 0.0 ? (u * p.chi_ddot - p.chi_dot * ud) / r2 : 0.0;
  return {std::sqrt(r2), -psi_dot + p.fdot * p.cos_chi, phi1};
}

inline double psi_of(const TrajPoint& p, double psi_hold) {
  const double u = p.sin_chi * p.fdot;
  if (p.chi_dot == 0.0 && u == 0.0) return psi_hold;
  return std::atan2(p.chi_dot, u);
}

inline double alpha_of(const Segment& seg, double t) {
  return seg.phi1 - psi_of(seg.traj(t), seg.psi_hold);
}

// geometric segment driven by its own design curve
inline Segment trajectory_segment(double t0, double t1, int n_steps, TrajFn traj, double phi1, double psi_hold,
                                  std::string label) {
  Segment s;
  s.t0 = t0;
  s.t1 = t1;
  s.n_steps = n_steps;
  s.phi1 = phi1;
  s.psi_hold = psi_hold;
  s.label = std::move(label);
  s.traj = std::move(traj);
  s.drive = [tf = s.traj, phi1](double t) { return drive_from_point(tf(t), phi1); };
  return s;
}

inline auto segment_hamiltonian(const PulseSchedule& p, const Segment& seg, const NoiseModel& noise) {
  return [&seg, b = p.bright(), noise, ref = p.omega_ref](double t) {
    return noisy_hamiltonian(seg.drive(t), b, noise, ref);
  };
}

// closed-system propagator U(t_end, t_start), segment by segment
inline Operator propagate_schedule(const PulseSchedule& p, const NoiseModel& noise = {},
                                   Diagnostics* diag = nullptr) {
  Operator u = Operator::Identity();
  for (const auto& seg : p.segments) u = propagate_schrodinger(segment_hamiltonian(p, seg, noise), seg.grid(), diag) * u;
  return u;
}

inline std::vector<Operator> segment_propagators(const PulseSchedule& p, const NoiseModel& noise = {}) {
  std::vector<Operator> out;
  for (const auto& seg : p.segments) out.push_back(propagate_schrodinger(segment_hamiltonian(p, seg, noise), seg.grid()));
  return out;
}

// same schedule on grids refined by an integer factor
inline PulseSchedule refined(PulseSchedule p, int factor) {
  for (auto& s : p.segments) s.n_steps *= factor;
  return p;
}

}  // namespace nhqc
