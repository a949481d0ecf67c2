#pragma once

#include "core.hpp"

#include <fmt/format.h>
#include <stdexcept>
#include <utility>

namespace nhqc {

struct Collapse {
  Operator op;
  double rate = 0.0;
};

namespace detail {

inline void check_hermitian(const Operator& h, double t) {
  double scale = std::max(1.0, max_abs(h));
  if (hermiticity_error(h) > 1e-12 * scale)
    throw std::invalid_argument(fmt::format("non-Hermitian Hamiltonian sample at t={:.6g} ns", t));
}

struct NoObserver {
  template <class M>
  void operator()(int, double, const M&) const {}
};

inline Superop kron(const Operator& a, const Operator& b) {
  Superop out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  return out;
}

inline Operator lindblad_rhs(const Operator& h, const std::vector<Collapse>& ops, const Operator& rho) {
  Operator out = -I * (h * rho - rho * h);
  for (const auto& c : ops) {
    if (c.rate == 0.0) continue;
    Operator ldl = c.op.adjoint() * c.op;
    out += c.rate * (c.op * rho * c.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

}  // namespace detail

// RK4 on dU/dt = -i H(t) U. obs(k, t_k, U_k) is called at every grid point.
template <class HFn, class Obs>
Operator propagate_schrodinger(const HFn& hfn, const TimeGrid& grid, Obs&& obs, Diagnostics* diag = nullptr) {
  grid.validate();
  const double h = grid.dt();
  Operator u = Operator::Identity();
  double t = grid.time(0);
  Operator h0 = hfn(t);
  detail::check_hermitian(h0, t);
  double worst = row_norm(h0);
  obs(0, t, u);
  for (int k = 0; k < grid.n_steps; ++k) {
    t = grid.time(k);
    const Operator hm = hfn(t + 0.5 * h);
    const double t1 = grid.time(k + 1);
    const Operator h1 = hfn(t1);
    detail::check_hermitian(h1, t1);
    worst = std::max(worst, row_norm(h1));
    const Operator k1 = -I * (h0 * u);
    const Operator k2 = -I * (hm * (u + 0.5 * h * k1));
    const Operator k3 = -I * (hm * (u + 0.5 * h * k2));
    const Operator k4 = -I * (h1 * (u + h * k3));
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    h0 = h1;
    obs(k + 1, t1, u);
  }
  if (worst * h >= 0.1)
    warn(diag, fmt::format("coarse grid: max|H|*dt = {:.3g} over [{:.4g}, {:.4g}]", worst * h, grid.t_start,
                           grid.t_end));
  double uerr = unitarity_error(u);
  if (uerr > 1e-6) throw NumericalError(fmt::format("propagator lost unitarity ({:.3g})", uerr));
  if (uerr > 1e-8) warn(diag, fmt::format("unitarity error {:.3g}", uerr));
  return u;
}

template <class HFn>
Operator propagate_schrodinger(const HFn& hfn, const TimeGrid& grid, Diagnostics* diag = nullptr) {
  return propagate_schrodinger(hfn, grid, detail::NoObserver{}, diag);
}

inline void check_rates(const std::vector<Collapse>& ops) {
  for (const auto& c : ops)
    if (c.rate < 0.0 || !std::isfinite(c.rate)) throw std::invalid_argument("collapse rate must be >= 0");
}

template <class HFn>
DensityMatrix propagate_lindblad(const HFn& hfn, const std::vector<Collapse>& ops, const DensityMatrix& rho0,
                                 const TimeGrid& grid) {
  grid.validate();
  check_rates(ops);
  validate_density(rho0);
  const double h = grid.dt();
  DensityMatrix rho = rho0;
  Operator h0 = hfn(grid.time(0));
  for (int k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time(k);
    const Operator hm = hfn(t + 0.5 * h);
    const Operator h1 = hfn(grid.time(k + 1));
    const Operator k1 = detail::lindblad_rhs(h0, ops, rho);
    const Operator k2 = detail::lindblad_rhs(hm, ops, rho + 0.5 * h * k1);
    const Operator k3 = detail::lindblad_rhs(hm, ops, rho + 0.5 * h * k2);
    const Operator k4 = detail::lindblad_rhs(h1, ops, rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    h0 = h1;
  }
  double drift = std::abs(rho.trace() - rho0.trace());
  if (drift > 1e-6) throw NumericalError(fmt::format("Lindblad trace drift {:.3g}", drift));
  rho = 0.5 * (rho + rho.adjoint()).eval();
  validate_density(rho);
  return rho;
}

inline Superop dissipator(const std::vector<Collapse>& ops) {
  Superop d = Superop::Zero();
  const Operator id = Operator::Identity();
  for (const auto& c : ops) {
    if (c.rate == 0.0) continue;
    Operator ldl = c.op.adjoint() * c.op;
    d += c.rate * (detail::kron(c.op.conjugate(), c.op) - 0.5 * detail::kron(id, ldl) -
                   0.5 * detail::kron(ldl.transpose(), id));
  }
  return d;
}

inline Superop liouvillian(const Operator& h, const Superop& diss) {
  const Operator id = Operator::Identity();
  return -I * (detail::kron(id, h) - detail::kron(h.transpose(), id)) + diss;
}

// column-major vec: vec(rho) -> S vec(rho)
inline DensityMatrix apply_superop(const Superop& s, const DensityMatrix& rho) {
  Eigen::Matrix<cplx, 9, 1> v = Eigen::Map<const Eigen::Matrix<cplx, 9, 1>>(rho.data());
  Eigen::Matrix<cplx, 9, 1> w = s * v;
  DensityMatrix out = Eigen::Map<const DensityMatrix>(w.data());
  return out;
}

// Whole-channel propagation; obs(k, t_k, S_k) at every grid point.
template <class HFn, class Obs>
Superop propagate_superop(const HFn& hfn, const std::vector<Collapse>& ops, const TimeGrid& grid, Obs&& obs) {
  grid.validate();
  check_rates(ops);
  const Superop diss = dissipator(ops);
  const double h = grid.dt();
  Superop s = Superop::Identity();
  Superop l0 = liouvillian(hfn(grid.time(0)), diss);
  obs(0, grid.time(0), s);
  for (int k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time(k);
    const Superop lm = liouvillian(hfn(t + 0.5 * h), diss);
    const Superop l1 = liouvillian(hfn(grid.time(k + 1)), diss);
    const Superop k1 = l0 * s;
    const Superop k2 = lm * (s + 0.5 * h * k1);
    const Superop k3 = lm * (s + 0.5 * h * k2);
    const Superop k4 = l1 * (s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    l0 = l1;
    obs(k + 1, grid.time(k + 1), s);
  }
  return s;
}

template <class HFn>
Superop propagate_superop(const HFn& hfn, const std::vector<Collapse>& ops, const TimeGrid& grid) {
  return propagate_superop(hfn, ops, grid, detail::NoObserver{});
}

// product of exact exponentials for piecewise-constant H; (H_k, duration_k) in time order
inline Operator expm_product(const std::vector<std::pair<Operator, double>>& pieces) {
  Operator u = Operator::Identity();
  for (const auto& [h, d] : pieces) u = expm_hermitian(h, d) * u;
  return u;
}

}  // namespace nhqc
