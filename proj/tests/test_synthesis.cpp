#include "nhqc/holonomy.hpp"
#include "nhqc/synthesis.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace nhqc;

namespace {

// erf via the all-positive series 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!
double erf_series(double x) {
  double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= 2.0 * x * x / (2.0 * n + 1.0);
    sum += term;
  }
  return 2.0 / std::sqrt(pi) * std::exp(-x * x) * sum;
}

// U restricted to {|Phi>, |e>}
Eigen::Matrix2cd block(const Operator& u, const MixingAngles& m) {
  Eigen::Matrix<cplx, 3, 2> b;
  b.col(0) = bright_state(m);
  b.col(1) = ket(ke);
  return b.adjoint() * u * b;
}

double block_distance(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  const cplx ov = (a.adjoint() * b).trace();
  const cplx ph = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1.0);
  return (a * ph - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Erf, LibmAgreesWithSeriesAtFour) {
  EXPECT_NEAR(std::erf(4.0), erf_series(4.0), 1e-15);
  EXPECT_NEAR(std::erfc(4.0), 1.0 - erf_series(4.0), 1e-15);
  EXPECT_NEAR(std::erf(0.5), erf_series(0.5), 1e-15);
}

TEST(ErfLeg, EndpointsAndDerivative) {
  const double T = 30.0;
  auto c0 = legs::erf_chi(0.0, T);
  EXPECT_NEAR(c0.chi, pi, 1e-15);
  auto c1 = legs::erf_chi(2 * T, T);
  EXPECT_NEAR(c1.chi, two_pi - pi * std::erfc(4.0), 1e-14);
  EXPECT_LT(std::abs(c1.sin_chi), 1e-6);
  for (double s : {1.0, 10.0, 25.0, 50.0}) {
    const double h = 1e-4;
    const double num = (legs::erf_chi(s + h, T).chi - legs::erf_chi(s - h, T).chi) / (2 * h);
    EXPECT_NEAR(legs::erf_chi(s, T).chi_dot, num, 1e-8);
    const double num2 = (legs::erf_chi(s + h, T).chi_dot - legs::erf_chi(s - h, T).chi_dot) / (2 * h);
    EXPECT_NEAR(legs::erf_chi(s, T).chi_ddot, num2, 1e-8);
  }
}

TEST(ErfProfile, MirroredAboutMidpoint) {
  const TimeGrid g{0.0, 120.0, 1200};
  const auto chi = chi_erf_profile(30.0, 120.0, g);
  for (int k = 0; k <= 1200; ++k) EXPECT_NEAR(chi[k], chi[1200 - k], 1e-12);
  EXPECT_NEAR(chi[0], pi, 1e-15);
  EXPECT_THROW(chi_erf_profile(30.0, 100.0, g), ConfigError);
}

TEST(SsspProfile, ZeroAnsatzIsTwoChi) {
  const std::vector<double> chi{0.1, 1.0, 2.0};
  const auto f = sssp_phase_profile(SSSPAnsatz{}, chi);
  for (std::size_t k = 0; k < chi.size(); ++k) EXPECT_DOUBLE_EQ(f[k], 2 * chi[k]);
  const auto f3 = sssp_phase_profile(sssp3(), chi);
  EXPECT_NEAR(f3[1], 2.0 - std::sin(2.0), 1e-15);
  EXPECT_THROW(SSSPAnsatz{std::vector<double>(9, 0.0)}.validate(), ConfigError);
}

TEST(AlphaFromChi, Examples) {
  const TimeGrid g{0.0, 1.0, 10};
  // constant chi: alpha = phi1
  std::vector<double> chi(11, pi / 2), phi(11, 0.3);
  auto a = alpha_from_chi(chi, phi, 1.0, g);
  for (double x : a) EXPECT_NEAR(x, 0.3, 1e-15);
  // chi' = omega0 sin(chi) at chi = pi/2 gives alpha = phi1 - pi/4
  for (int k = 0; k <= 10; ++k) chi[k] = pi / 2 + 0.5 * (g.time(k) - 0.5);
  a = alpha_from_chi(chi, phi, 0.5, g);
  EXPECT_NEAR(a[5], 0.3 - pi / 4, 1e-12);
  EXPECT_THROW(alpha_from_chi(chi, phi, 0.0, g), ConfigError);
  // 0/0 at the first sample is resolved with a warning
  std::vector<double> pole(11, 0.0);
  Diagnostics d;
  a = alpha_from_chi(pole, phi, 1.0, g, &d);
  EXPECT_FALSE(d.warnings.empty());
}

TEST(SampledInversion, ConstantChiGivesDeltaEqualAlphaRate) {
  const TimeGrid g{0.0, 2.0, 200};
  std::vector<double> chi(201, 1.0), alpha(201), phi(201, 0.0);
  for (int k = 0; k <= 200; ++k) alpha[k] = 0.7 * g.time(k);
  const auto d = synthesize_from_samples(g, chi, alpha, phi);
  for (const auto& s : d.samples) {
    EXPECT_NEAR(s.omega, 0.0, 1e-15);
    EXPECT_NEAR(s.delta, 0.7, 1e-12);
  }
}

TEST(SampledInversion, SingularDriveRejected) {
  const TimeGrid g{0.0, 1.0, 10};
  std::vector<double> chi(11), alpha(11, 0.0), phi(11, 0.0);
  for (int k = 0; k <= 10; ++k) chi[k] = 1.0 + 0.1 * k;
  EXPECT_THROW(synthesize_from_samples(g, chi, alpha, phi), SynthesisError);
  EXPECT_THROW(synthesize_from_samples(g, chi, alpha, std::vector<double>(3)), ConfigError);
}

TEST(SampledInversion, RoundTripsTheAnalyticErfLeg) {
  const GateTiming tm;
  const auto p = two_interval_gate(not_gate(), tm);
  const auto& seg = p.segments.front();
  const TimeGrid g{seg.t0, seg.t1, 6000};
  std::vector<double> chi(g.n_points()), alpha(g.n_points()), phi(g.n_points(), seg.phi1);
  for (int k = 0; k < g.n_points(); ++k) {
    chi[k] = seg.traj(g.time(k)).chi;
    alpha[k] = alpha_of(seg, g.time(k));
  }
  const auto d = synthesize_from_samples(g, chi, alpha, phi);
  double worst_o = 0.0, worst_d = 0.0;
  for (int k = 50; k < g.n_points() - 50; ++k) {
    const DriveSample a = seg.drive(g.time(k));
    worst_o = std::max(worst_o, std::abs(d.samples[k].omega - a.omega));
    worst_d = std::max(worst_d, std::abs(d.samples[k].delta - a.delta));
  }
  EXPECT_LT(worst_o, 1e-4 * tm.omega0);
  EXPECT_LT(worst_d, 1e-3 * tm.omega0);
}

TEST(SampledSegment, InterpolatesComplexAmplitude) {
  SampledDrive d{TimeGrid{0.0, 1.0, 2}, {{1.0, 0.0, 0.0}, {1.0, 0.2, pi / 2}, {1.0, 0.4, pi}}};
  const Segment s = sampled_segment(d, "x");
  const DriveSample mid = s.drive(0.25);
  EXPECT_NEAR(mid.omega, std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(mid.phi1, pi / 4, 1e-14);
  EXPECT_NEAR(mid.delta, 0.1, 1e-14);
  EXPECT_NEAR(s.drive(1.0).phi1, pi, 1e-14);
}

TEST(TwoInterval, RealizesNotAndTGates) {
  for (const auto& g : {not_gate(), t_gate()}) {
    const auto eg = extract_gate(propagate_schedule(two_interval_gate(g, GateTiming{})));
    EXPECT_LT(operator_distance(eg.gate, target_unitary(g)), 1e-8);
    EXPECT_LT(eg.leakage, 1e-8);
  }
  EXPECT_THROW(two_interval_gate(not_gate(), GateTiming{0.0, 1.0, 100}), ConfigError);
}

TEST(TwoInterval, DriveIsNonNegativeAndPhasesAreConstant) {
  const auto p = two_interval_gate(t_gate(), GateTiming{});
  for (const auto& ts : sample_schedule(p)) EXPECT_GE(ts.s.omega, 0.0);
  EXPECT_NEAR(wrap_angle(p.segments[1].phi1 - p.segments[0].phi1 - (pi / 4 + pi)), 0.0, 1e-12);
}

TEST(Baselines, NhqcAndDgRealizeTheGate) {
  const GateTiming tm;
  for (const auto& g : {not_gate(), t_gate()}) {
    const auto n = extract_gate(propagate_schedule(nhqc_baseline_schedule(g, tm.tau(), tm.n_steps, tm.omega0)));
    EXPECT_LT(operator_distance(n.gate, target_unitary(g)), 1e-6);
    const auto d = extract_gate(propagate_schedule(dg_baseline_schedule(g, tm.tau(), tm.n_steps, tm.omega0)));
    EXPECT_LT(operator_distance(d.gate, target_unitary(g)), 1e-4);
    EXPECT_LT(d.leakage, 1e-4);
  }
}

TEST(Sssp, PaperSetsRealizeTheGate) {
  for (const auto& a : {sssp3(), sssp5(), sssp7()}) {
    const auto eg = extract_gate(propagate_schedule(synthesize_sssp_schedule(not_gate(), a, GateTiming{})));
    EXPECT_LT(operator_distance(eg.gate, target_unitary(not_gate())), 1e-6);
    EXPECT_LT(eg.leakage, 1e-6);
  }
}

TEST(Kdd, LayoutHasTwentyPulsesWithBlockPhases) {
  const auto seq = kdd_layout(0.3, 120.0, 1.2);
  ASSERT_EQ(seq.pulses.size(), 20u);
  EXPECT_NEAR(seq.tau_free(), 4.8, 1e-12);
  const double offs[4] = {0.3, 0.3 + pi / 2, 0.3, 0.3 + pi / 2};
  for (int b = 0; b < 4; ++b)
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(seq.pulses[5 * b + k].phase, kdd_block_phases[k] + offs[b], 1e-15);
  for (std::size_t k = 1; k < 20; ++k)
    EXPECT_NEAR(seq.pulses[k].t_center - seq.pulses[k - 1].t_center, 1.2 + 4.8, 1e-12);
  EXPECT_NEAR(seq.pulses.front().t_center, 2.4 + 0.6, 1e-12);
  EXPECT_THROW(kdd_layout(0.0, 120.0, 5.0), ConfigError);
  EXPECT_THROW(kdd_layout(0.0, 120.0, 0.0), ConfigError);
}

TEST(Kdd, PiPulseAlgebraOnBrightExcitedBlock) {
  const MixingAngles m{pi / 2, pi};
  auto pulse = [&](double eta) { return block(propagate_schedule(kdd_pi_pulse(eta, 1.2, m, 2000)), m); };
  // each pulse swaps |Phi> and |e>
  const auto x = pulse(0.0);
  EXPECT_LT(std::abs(x(0, 0)), 1e-9);
  EXPECT_NEAR(std::abs(x(1, 0)), 1.0, 1e-9);
  // two identical pulses: identity up to phase
  EXPECT_LT(block_distance(x * x, Eigen::Matrix2cd::Identity()), 1e-9);
  // (pi)_0 (pi)_{pi/2} (pi)_0 = (pi)_{-pi/2} up to phase
  EXPECT_LT(block_distance(pulse(0.0) * pulse(pi / 2) * pulse(0.0), pulse(-pi / 2)), 1e-9);
  // dark state untouched
  const Operator u = propagate_schedule(kdd_pi_pulse(0.7, 1.2, m, 2000));
  EXPECT_LT((u * dark_state(m) - dark_state(m)).norm(), 1e-12);
}

TEST(Kdd, SequenceRealizesNot) {
  const GateTiming tm;
  const auto p = build_kdd_sequence(0.0, tm.tau(), 0.01 * tm.tau(), mixing_for(not_gate()), tm.omega0);
  const auto eg = extract_gate(propagate_schedule(p));
  EXPECT_LT(operator_distance(eg.gate, target_unitary(not_gate())), 1e-3);
  EXPECT_LT(eg.leakage, 1e-6);
  EXPECT_NEAR(p.duration(), tm.tau(), 1e-12);
}

TEST(PulseCsv, HeaderPrecisionAndSpan) {
  const auto p = two_interval_gate(not_gate(), GateTiming{30.0, 2 * pi * 0.05, 200});
  std::ostringstream os;
  write_schedule_csv(os, p);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t_ns,omega,delta,phi1");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, static_cast<int>(sample_schedule(p).size()));
  EXPECT_EQ(last.substr(0, 4), "120,");
  // 12 significant digits: pi/4 + pi on leg 2 of the T gate would print as 3.92699081699
  std::ostringstream t;
  write_schedule_csv(t, two_interval_gate(t_gate(), GateTiming{30.0, 2 * pi * 0.05, 200}));
  EXPECT_NE(t.str().find(",3.92699081699\n"), std::string::npos);
}
