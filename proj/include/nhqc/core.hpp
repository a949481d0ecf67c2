#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhqc {

using cplx = std::complex<double>;
using Operator = Eigen::Matrix3cd;
using StateVector = Eigen::Vector3cd;
using DensityMatrix = Eigen::Matrix3cd;
using Qubit2 = Eigen::Matrix2cd;
using Superop = Eigen::Matrix<cplx, 9, 9>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// basis order (|0>, |1>, |e>)
inline constexpr int k0 = 0;
inline constexpr int k1 = 1;
inline constexpr int ke = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// collected non-fatal warnings; pass nullptr to drop them
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

inline void warn(Diagnostics* d, std::string msg) {
  if (d) d->warn(std::move(msg));
}

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  int n_steps = 2;

  double dt() const { return (t_end - t_start) / n_steps; }
  double time(int k) const {
    // exact endpoints, no accumulated drift
    if (k == n_steps) return t_end;
    return t_start + k * dt();
  }
  int n_points() const { return n_steps + 1; }
  void validate() const {
    if (n_steps < 2) throw ConfigError("TimeGrid: n_steps must be >= 2");
    if (!(t_end > t_start)) throw ConfigError("TimeGrid: t_end must exceed t_start");
  }
};

inline StateVector ket(int k) {
  StateVector v = StateVector::Zero();
  v(k) = 1.0;
  return v;
}

inline Operator projector(const StateVector& v) { return v * v.adjoint(); }

inline double max_abs(const Operator& a) { return a.cwiseAbs().maxCoeff(); }

inline double hermiticity_error(const Operator& h) { return max_abs(h - h.adjoint()); }

inline double unitarity_error(const Operator& u) {
  return max_abs(u.adjoint() * u - Operator::Identity());
}

// infinity-norm; cheap bound on the spectral radius
inline double row_norm(const Operator& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

template <class M>
double phase_free_distance(const M& a, const M& b) {
  cplx ov = (a.adjoint() * b).trace();
  cplx ph = std::abs(ov) > 0.0 ? std::conj(ov) / std::abs(ov) : cplx(1.0);
  return (a - ph * b).cwiseAbs().maxCoeff();
}

// max-norm of A - e^{ix} B with x maximizing Re tr(A^dag e^{ix} B)
inline double operator_distance(const Operator& a, const Operator& b) { return phase_free_distance(a, b); }
inline double operator_distance(const Qubit2& a, const Qubit2& b) { return phase_free_distance(a, b); }

inline void validate_density(const DensityMatrix& rho, double tol = 1e-9) {
  if (hermiticity_error(rho) > tol) throw NumericalError("density matrix not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > tol) throw NumericalError("density matrix trace != 1");
  Eigen::SelfAdjointEigenSolver<Operator> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) throw NumericalError("density matrix has negative eigenvalue");
}

inline double state_fidelity(const StateVector& psi, const DensityMatrix& rho) {
  double f = std::real(psi.dot(rho * psi));
  if (f < 0.0 && f > -1e-12) f = 0.0;
  return f;
}

// Hermitian matrix exponential exp(-i H t) through the eigendecomposition
inline Operator expm_hermitian(const Operator& h, double t) {
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (h + h.adjoint()));
  Eigen::Vector3cd ph;
  for (int k = 0; k < 3; ++k) ph(k) = std::exp(-I * es.eigenvalues()(k) * t);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// wrap to (-pi, pi]
inline double wrap_angle(double x) {
  double y = std::remainder(x, two_pi);
  if (y <= -pi) y += two_pi;
  return y;
}

// Neumaier compensated sum; order fixed by the caller
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

}  // namespace nhqc
