#pragma once

#include "core.hpp"
#include "propagate.hpp"

#include <stdexcept>

namespace nhqc {

struct MixingAngles {
  double theta = pi / 2;
  double phi = 0.0;
};

struct DriveSample {
  double omega = 0.0;  // rad/ns, >= 0
  double delta = 0.0;  // rad/ns
  double phi1 = 0.0;   // rad
};

// scaled: Omega -> (1+beta) Omega inside the drive term
// literal: adds beta*Omega*(|Phi><e| + h.c.), no 1/2 and no drive phase
enum class RabiError { scaled, literal };

struct NoiseModel {
  double beta = 0.0;
  double epsilon = 0.0;  // static detuning, fraction of omega_ref
  double gamma1 = 0.0;   // rad/ns
  double gamma2 = 0.0;   // rad/ns
  RabiError rabi = RabiError::scaled;
  bool decay_to_both = true;  // |0><e| and |1><e|; false keeps only |0><e|
};

inline double khz_to_rad_per_ns(double khz) { return two_pi * khz * 1e-6; }
inline double mhz_to_rad_per_ns(double mhz) { return two_pi * mhz * 1e-3; }

inline StateVector bright_state(const MixingAngles& m) {
  StateVector v;
  v << std::sin(m.theta / 2), std::cos(m.theta / 2) * std::exp(I * m.phi), 0.0;
  return v;
}

inline StateVector dark_state(const MixingAngles& m) {
  StateVector v;
  v << std::cos(m.theta / 2), -std::sin(m.theta / 2) * std::exp(I * m.phi), 0.0;
  return v;
}

inline Operator hamiltonian_full(cplx omega_p, cplx omega_s, double delta) {
  Operator h = Operator::Zero();
  h(k0, ke) = 0.5 * omega_p;
  h(k1, ke) = 0.5 * omega_s;
  h(ke, k0) = std::conj(h(k0, ke));
  h(ke, k1) = std::conj(h(k1, ke));
  h(ke, ke) = delta;
  return h;
}

// Delta|e><e| + (Omega/2)(e^{i phi1}|Phi><e| + h.c.) for a precomputed |Phi>
inline Operator hamiltonian_bright(const DriveSample& s, const StateVector& bright) {
  const cplx c = s.omega * std::exp(I * s.phi1);
  return hamiltonian_full(c * bright(k0), c * bright(k1), s.delta);
}

inline Operator hamiltonian_bright(const DriveSample& s, const MixingAngles& m) {
  return hamiltonian_bright(s, bright_state(m));
}

inline Operator perturbing_hamiltonian(double beta, const DriveSample& s, const StateVector& bright) {
  const cplx c = beta * s.omega;
  return hamiltonian_full(2.0 * c * bright(k0), 2.0 * c * bright(k1), 0.0);
}

inline Operator perturbing_hamiltonian(double beta, const DriveSample& s, const MixingAngles& m) {
  return perturbing_hamiltonian(beta, s, bright_state(m));
}

inline Operator detuning_error(double epsilon, double omega_max) {
  Operator h = Operator::Zero();
  h(ke, ke) = epsilon * omega_max;
  return h;
}

inline std::vector<Collapse> collapse_operators(const NoiseModel& n) {
  if (n.gamma1 < 0.0 || n.gamma2 < 0.0) throw std::invalid_argument("decay/dephasing rates must be >= 0");
  std::vector<Collapse> out;
  if (n.gamma1 > 0.0) {
    out.push_back({ket(k0) * ket(ke).adjoint(), n.gamma1});
    if (n.decay_to_both) out.push_back({ket(k1) * ket(ke).adjoint(), n.gamma1});
  }
  if (n.gamma2 > 0.0) out.push_back({projector(ket(ke)), n.gamma2});
  return out;
}

// drive sample with beta/epsilon errors applied
inline Operator noisy_hamiltonian(const DriveSample& s, const StateVector& bright, const NoiseModel& n,
                                  double omega_ref) {
  DriveSample d = s;
  d.delta += n.epsilon * omega_ref;
  if (n.rabi == RabiError::scaled) {
    d.omega *= 1.0 + n.beta;
    return hamiltonian_bright(d, bright);
  }
  Operator h = hamiltonian_bright(d, bright);
  if (n.beta != 0.0) h += perturbing_hamiltonian(n.beta, s, bright);
  return h;
}

}  // namespace nhqc
