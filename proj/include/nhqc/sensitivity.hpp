#pragma once

#include "core.hpp"
#include "holonomy.hpp"
#include "synthesis.hpp"

#include <fmt/format.h>

#include <array>
#include <map>

namespace nhqc {

// |int chi' sin^2(chi) e^{-i f} dt|^2, trapezoid per piece
inline double qs_sensitivity(const AuxiliaryTrajectory& tr) {
  cplx acc = 0.0;
  for (const auto& pc : tr.pieces) {
    const double h = pc.grid.dt();
    const int n = pc.grid.n_points();
    for (int k = 0; k < n; ++k) {
      const double s = std::sin(pc.chi[k]);
      const double w = (k == 0 || k == n - 1) ? 0.5 * h : h;
      acc += w * pc.chi_dot[k] * s * s * std::exp(-I * pc.f[k]);
    }
  }
  return std::norm(acc);
}

inline double qs_sensitivity(const PulseSchedule& p) { return qs_sensitivity(auxiliary_trajectory(p)); }

struct FdSensitivity {
  double value = 0.0;
  double h = 0.01;
  bool widened = false;
  std::array<double, 3> sequence{};  // estimates at h, 2h, 4h
};

// P(beta) = |<U_0 mu+(0) | U_beta mu+(0)>|^2, Q = -1/2 P''(0) from the 5-point stencil
inline FdSensitivity fd_sensitivity(const PulseSchedule& p, double h = 0.01, NoiseModel base = {},
                                    Diagnostics* diag = nullptr) {
  StateVector m = p.bright();
  if (p.geometric()) {
    const auto& seg = p.segments.front();
    const TrajPoint q = seg.traj(seg.t0);
    m = mu_plus(q.chi, seg.phi1 - psi_of(q, seg.psi_hold), p.bright());
  }
  base.beta = 0.0;
  const StateVector ref = propagate_schedule(p, base) * m;
  auto prob = [&](double beta) {
    NoiseModel n = base;
    n.beta = beta;
    return std::norm(ref.dot(propagate_schedule(p, n) * m));
  };
  std::map<int, double> cache;
  auto at = [&](int j) {
    auto it = cache.find(j);
    if (it != cache.end()) return it->second;
    return cache[j] = prob(j * h);
  };
  auto est = [&](int s) {
    const double hh = s * h;
    const double d2 = (-at(-2 * s) + 16.0 * at(-s) - 30.0 * at(0) + 16.0 * at(s) - at(2 * s)) / (12.0 * hh * hh);
    return -0.5 * d2;
  };
  FdSensitivity out;
  out.h = h;
  out.sequence = {est(1), est(2), est(4)};
  out.value = out.sequence[0];
  const double d1 = std::abs(out.sequence[0] - out.sequence[1]);
  const double d2 = std::abs(out.sequence[1] - out.sequence[2]);
  const double floor = 1e-9 * std::max(1.0, std::abs(out.sequence[1]));
  if (d1 > d2 && d1 > floor) {
    out.widened = true;
    out.value = out.sequence[1];
    out.h = 2 * h;
    warn(diag, fmt::format("fd_sensitivity: non-monotone Richardson sequence ({:.3g}, {:.3g}, {:.3g}); using h={}",
                           out.sequence[0], out.sequence[1], out.sequence[2], out.h));
  }
  return out;
}

}  // namespace nhqc
