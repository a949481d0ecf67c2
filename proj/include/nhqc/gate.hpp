#pragma once

#include "core.hpp"
#include "lambda_system.hpp"

namespace nhqc {

struct GateSpec {
  double gamma = pi;
  double theta = pi / 2;
  double phi = 0.0;

  GateSpec canonical() const {
    auto mod = [](double x) {
      double y = std::fmod(x, two_pi);
      return y < 0.0 ? y + two_pi : y;
    };
    return {mod(gamma), theta, mod(phi)};
  }
};

inline GateSpec not_gate() { return {pi, pi / 2, 0.0}; }
inline GateSpec t_gate() { return {pi / 4, 0.0, 0.0}; }

// e^{i gamma/2} exp(-i gamma/2 n.sigma) on {|0>, |1>}
inline Qubit2 target_unitary(const GateSpec& g) {
  const double nx = std::sin(g.theta) * std::cos(g.phi);
  const double ny = std::sin(g.theta) * std::sin(g.phi);
  const double nz = std::cos(g.theta);
  Qubit2 ns;
  ns << nz, cplx(nx, -ny), cplx(nx, ny), -nz;
  const double c = std::cos(g.gamma / 2), s = std::sin(g.gamma / 2);
  return std::exp(I * (g.gamma / 2)) * (c * Qubit2::Identity() - I * s * ns);
}

// The bright state must be the -1 eigenvector of n.sigma, which is the printed
// bright state at azimuth phi + pi.
inline MixingAngles mixing_for(const GateSpec& g) { return {g.theta, g.phi + pi}; }

inline Operator embed(const Qubit2& q) {
  Operator u = Operator::Zero();
  u.topLeftCorner<2, 2>() = q;
  u(ke, ke) = 1.0;
  return u;
}

}  // namespace nhqc
