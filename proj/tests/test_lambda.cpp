#include "nhqc/gate.hpp"
#include "nhqc/lambda_system.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nhqc;

TEST(Units, Conversions) {
  EXPECT_NEAR(khz_to_rad_per_ns(10.0), 2 * pi * 1e-5, 1e-18);
  EXPECT_NEAR(mhz_to_rad_per_ns(50.0), 2 * pi * 0.05, 1e-15);
}

TEST(BrightDark, OrthonormalForRandomAngles) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, two_pi);
  for (int k = 0; k < 100; ++k) {
    const MixingAngles m{u(rng) / 2, u(rng)};
    const auto b = bright_state(m), d = dark_state(m);
    EXPECT_NEAR(b.norm(), 1.0, 1e-14);
    EXPECT_NEAR(d.norm(), 1.0, 1e-14);
    EXPECT_LT(std::abs(b.dot(d)), 1e-14);
    EXPECT_EQ(b(ke), cplx(0.0));
  }
}

TEST(Hamiltonian, BrightFormMatchesFullForm) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const MixingAngles m{pi * u(rng), two_pi * u(rng)};
    const DriveSample s{2.0 * u(rng), u(rng) - 0.5, two_pi * u(rng)};
    const auto b = bright_state(m);
    const cplx c = s.omega * std::exp(I * s.phi1);
    const Operator full = hamiltonian_full(c * b(k0), c * b(k1), s.delta);
    EXPECT_LT(max_abs(full - hamiltonian_bright(s, m)), 1e-15);
    EXPECT_LT(hermiticity_error(full), 1e-15);
    // dark state is annihilated, bright couples with strength Omega/2
    EXPECT_LT((full * dark_state(m)).norm(), 1e-14);
    EXPECT_NEAR(std::abs(ket(ke).dot(full * b)), 0.5 * s.omega, 1e-14);
  }
}

TEST(Hamiltonian, ExampleEntries) {
  const MixingAngles m{pi / 2, 0.0};
  const Operator h = hamiltonian_bright(DriveSample{1.0, 0.25, 0.0}, m);
  EXPECT_NEAR(h(k0, ke).real(), 0.5 * std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(h(k1, ke).real(), 0.5 * std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(h(ke, ke).real(), 0.25, 1e-15);
}

TEST(Perturbation, LiteralForm) {
  const MixingAngles m{pi / 3, 0.4};
  const DriveSample s{0.7, 0.0, 1.1};
  const auto b = bright_state(m);
  const Operator hb = perturbing_hamiltonian(0.1, s, b);
  const Operator expect = 0.1 * 0.7 * (b * ket(ke).adjoint() + ket(ke) * b.adjoint());
  EXPECT_LT(max_abs(hb - expect), 1e-15);
  EXPECT_LT(max_abs(perturbing_hamiltonian(0.0, s, b)), 1e-16);
}

TEST(DetuningError, Example) {
  EXPECT_LT(max_abs(detuning_error(0.0, 1.0)), 1e-16);
  const Operator h = detuning_error(0.1, 2 * pi * 0.05);
  EXPECT_NEAR(h(ke, ke).real(), 0.1 * 2 * pi * 0.05, 1e-16);
  EXPECT_NEAR(max_abs(h), std::abs(h(ke, ke)), 0.0);
}

TEST(Noise, ScaledAndDetuned) {
  const MixingAngles m{pi / 2, pi};
  const auto b = bright_state(m);
  const DriveSample s{0.3, 0.05, 0.2};
  NoiseModel n;
  n.beta = 0.1;
  n.epsilon = -0.05;
  const Operator h = noisy_hamiltonian(s, b, n, 0.4);
  const Operator expect = hamiltonian_bright(DriveSample{0.33, 0.05 - 0.02, 0.2}, b);
  EXPECT_LT(max_abs(h - expect), 1e-15);
  n.rabi = RabiError::literal;
  const Operator hl = noisy_hamiltonian(s, b, n, 0.4);
  EXPECT_LT(max_abs(hl - (hamiltonian_bright(DriveSample{0.3, 0.03, 0.2}, b) + perturbing_hamiltonian(0.1, s, b))),
            1e-15);
}

TEST(Collapse, OperatorSet) {
  NoiseModel n;
  EXPECT_TRUE(collapse_operators(n).empty());
  n.gamma1 = 0.1;
  n.gamma2 = 0.2;
  auto ops = collapse_operators(n);
  ASSERT_EQ(ops.size(), 3u);
  EXPECT_EQ(ops[0].op(k0, ke), cplx(1.0));
  EXPECT_EQ(ops[1].op(k1, ke), cplx(1.0));
  EXPECT_EQ(ops[2].op(ke, ke), cplx(1.0));
  n.decay_to_both = false;
  EXPECT_EQ(collapse_operators(n).size(), 2u);
  n.gamma1 = -1.0;
  EXPECT_THROW(collapse_operators(n), std::invalid_argument);
}

TEST(Gate, TargetExamples) {
  // NOT up to global phase
  Qubit2 x;
  x << 0, 1, 1, 0;
  EXPECT_LT(operator_distance(target_unitary(not_gate()), x), 1e-14);
  // T = diag(1, e^{i pi/4})
  Qubit2 t = Qubit2::Zero();
  t(0, 0) = 1.0;
  t(1, 1) = std::exp(I * (pi / 4));
  EXPECT_LT(operator_distance(target_unitary(t_gate()), t), 1e-14);
  // gamma = 0 is the identity
  EXPECT_LT(operator_distance(target_unitary(GateSpec{0.0, 1.0, 2.0}), Qubit2::Identity()), 1e-14);
}

TEST(Gate, TargetIsUnitaryAndEmbedded) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, two_pi);
  for (int k = 0; k < 50; ++k) {
    const GateSpec g{u(rng), u(rng) / 2, u(rng)};
    const Qubit2 q = target_unitary(g);
    EXPECT_LT((q * q.adjoint() - Qubit2::Identity()).cwiseAbs().maxCoeff(), 1e-14);
    const Operator e = embed(q);
    EXPECT_EQ(e(ke, ke), cplx(1.0));
    EXPECT_EQ(e(k0, ke), cplx(0.0));
  }
}

TEST(Gate, DarkStateIsTheFixedAxis) {
  // with mixing_for, the bright state picks up e^{i gamma} relative to the dark state
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, two_pi);
  for (int k = 0; k < 50; ++k) {
    const GateSpec g{u(rng), u(rng) / 2, u(rng)};
    const auto m = mixing_for(g);
    const Operator e = embed(target_unitary(g));
    const auto b = bright_state(m), d = dark_state(m);
    EXPECT_LT((e * d - d).norm(), 1e-13);
    EXPECT_LT((e * b - std::exp(I * g.gamma) * b).norm(), 1e-13);
  }
}
