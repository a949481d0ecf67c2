#include "nhqc/sweep.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <sstream>

using namespace nhqc;

namespace {

SweepConfig small(std::vector<std::string> schemes) {
  SweepConfig c;
  c.schemes = std::move(schemes);
  c.beta = {-0.1, 0.1, 5};
  c.n_states = 101;
  c.params.timing.n_steps = 3000;
  return c;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream os;
  write_sweep_csv(os, r);
  return os.str();
}

}  // namespace

TEST(Range, Endpoints) {
  const Range r{-0.2, 0.2, 41};
  EXPECT_DOUBLE_EQ(r.at(0), -0.2);
  EXPECT_DOUBLE_EQ(r.at(40), 0.2);
  EXPECT_NEAR(r.at(20), 0.0, 1e-16);
  EXPECT_DOUBLE_EQ((Range{0.3, 0.3, 1}.at(0)), 0.3);
}

TEST(SweepConfig, Validation) {
  SweepConfig c;
  EXPECT_NO_THROW(c.validate());
  c.beta = {0.2, -0.2, 5};
  EXPECT_THROW(c.validate(), ConfigError);
  c.beta = {-0.2, 0.2, 0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = SweepConfig{};
  c.schemes = {"nope"};
  EXPECT_THROW(c.validate(), ConfigError);
  c.schemes = {};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Schemes, AllBuildAndAreAccurateAtZeroNoise) {
  SchemeParams sp;
  sp.custom = sssp5();
  for (const auto& id : known_schemes()) {
    const auto p = build_scheme(id, not_gate(), sp);
    EXPECT_EQ(p.scheme, id);
    EXPECT_GT(average_gate_fidelity(p, not_gate(), NoiseModel{}, 101), 1 - 1e-3) << id;
  }
  EXPECT_THROW(build_scheme("NHQC+KDD", t_gate(), sp), ConfigError);
  EXPECT_THROW(build_scheme("bogus", not_gate(), sp), ConfigError);
}

TEST(ParallelFor, EveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, 8, [&](int i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  int serial = 0;
  parallel_for(5, 1, [&](int) { ++serial; });
  EXPECT_EQ(serial, 5);
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
  auto c = small({"NHQC+", "NHQC"});
  c.workers = 1;
  const auto a = csv_of(robustness_sweep_beta(c));
  c.workers = 4;
  const auto b = csv_of(robustness_sweep_beta(c));
  const auto d = csv_of(robustness_sweep_beta(c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, d);
  EXPECT_EQ(a.substr(0, a.find('\n')), "scheme,beta,epsilon,fidelity,leakage");
}

TEST(Sweep, ZeroCellIsTheMaximumOfTheMap) {
  auto c = small({"NHQC"});
  c.beta = {-0.1, 0.1, 3};
  c.epsilon = {-0.1, 0.1, 3};
  const auto r = robustness_map_beta_epsilon(c);
  ASSERT_EQ(r.cells.size(), 9u);
  double best = 0.0, at0 = 0.0;
  for (const auto& cell : r.cells) {
    best = std::max(best, cell.fidelity);
    if (cell.beta == 0.0 && cell.epsilon == 0.0) at0 = cell.fidelity;
  }
  EXPECT_EQ(at0, best);
  EXPECT_EQ(r.metadata["kind"], "beta_epsilon");
}

TEST(Sweep, MapMarginalMatchesBetaSweep) {
  auto c = small({"NHQC+SSSP3"});
  c.epsilon = {-0.1, 0.1, 3};
  const auto map = robustness_map_beta_epsilon(c);
  auto c1 = c;
  c1.epsilon = {0.0, 0.0, 1};
  const auto line = robustness_sweep_beta(c1);
  for (const auto* l : line.for_scheme("NHQC+SSSP3"))
    for (const auto* m : map.for_scheme("NHQC+SSSP3"))
      if (m->beta == l->beta && m->epsilon == 0.0) {
        EXPECT_NEAR(m->fidelity, l->fidelity, 1e-6);
      }
}

TEST(Sweep, BetaSymmetry) {
  auto c = small({"NHQC", "NHQC+"});
  c.beta = {-0.05, 0.05, 3};
  const auto r = robustness_sweep_beta(c);
  for (const auto& s : c.schemes) {
    const auto cells = r.for_scheme(s);
    EXPECT_NEAR(cells.front()->fidelity, cells.back()->fidelity, s == "NHQC" ? 1e-9 : 1e-3) << s;
  }
}

TEST(Sweep, FailedSchemeIsRecordedNotThrown) {
  auto c = small({"NHQC+KDD"});
  c.gate = t_gate();
  const auto r = run_sweep(c);
  EXPECT_EQ(r.failed(), 5);
  EXPECT_NE(r.cells.front().error.find("gamma = pi"), std::string::npos);
}

TEST(Sweep, RabiOrderingAtTenPercent) {
  auto c = small({"NHQC+", "NHQC", "DG"});
  c.beta = {-0.1, 0.1, 2};
  c.params.timing.n_steps = 10000;
  const auto r = robustness_sweep_beta(c);
  for (int side = 0; side < 2; ++side) {
    const double a = r.for_scheme("NHQC+")[side]->fidelity, n = r.for_scheme("NHQC")[side]->fidelity,
                 d = r.for_scheme("DG")[side]->fidelity;
    EXPECT_GT(a - n, 1e-3);
    EXPECT_GT(n - d, 1e-3);
  }
}

TEST(ThresholdWidth, AnalyticParabola) {
  auto f = [](double b) { return 1.0 - b * b; };
  EXPECT_NEAR(threshold_width(f, 0.99, 0.5, 1e-6), 0.2, 1e-5);
  EXPECT_NEAR(threshold_width(f, 0.5, 0.5), 1.0, 1e-12);  // never crosses inside the limit
  EXPECT_EQ(threshold_width(f, 1.5), 0.0);
  auto g = [](double b) { return 1.0 - (b - 0.05) * (b - 0.05); };
  EXPECT_NEAR(threshold_width(g, 0.99, 0.5, 1e-6), 0.2, 1e-5);
}

TEST(AreaFraction, CountsCells) {
  SweepResult r;
  r.cells = {{"A", 0, 0, 0.995, 0, ""}, {"A", 0, 0, 0.98, 0, ""}, {"A", 0, 0, 0.999, 0, "boom"}, {"B", 0, 0, 1, 0, ""}};
  EXPECT_NEAR(area_fraction(r, "A", 0.99), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(area_fraction(r, "B", 0.99), 1.0);
  EXPECT_EQ(area_fraction(r, "C", 0.99), 0.0);
}
