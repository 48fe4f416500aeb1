#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "properties.hpp"
#include "rfopf/lp.hpp"
#include "rfopf/rnf.hpp"

using namespace rfopf;
constexpr double kPi = std::numbers::pi;

namespace {

struct Toy {
  LinearModel m;
  SocBlock blk;
  int x, y, z;
};

Toy toy(double x, double y, double z, double M = 10.0) {
  Toy t;
  t.x = t.m.add_variable("x", x, x);
  t.y = t.m.add_variable("y", y, y);
  t.z = t.m.add_variable("z", z, z);
  t.blk.id = 0;
  t.blk.x = LinExpr::var(t.x);
  t.blk.y = LinExpr::var(t.y);
  t.blk.z = LinExpr::var(t.z);
  t.blk.z_max = M;
  t.blk.big_m = M;
  return t;
}

// Coefficient of variable v in row r (0 when absent).
double coef(const Row& r, int v) {
  for (const auto& t : r.terms)
    if (t.var == v) return t.coef;
  return 0.0;
}

}  // namespace

TEST(Theta, Values) {
  EXPECT_DOUBLE_EQ(theta(0), kPi / 2);
  EXPECT_DOUBLE_EQ(theta(1), kPi / 4);
  EXPECT_NEAR(theta(4), 0.09817, 1e-5);
  EXPECT_THROW(theta(-1), std::invalid_argument);
}

TEST(AppendStage, CountsStagesAndBinaries) {
  for (int K = 0; K <= 5; ++K) {
    auto t = toy(0.3, 0.4, 1.0);
    extend_rnf(t.m, t.blk, K);
    EXPECT_EQ(t.blk.stages.size(), static_cast<std::size_t>(K + 1));
    EXPECT_EQ(t.m.binaries().size(), static_cast<std::size_t>(K + 2));
    EXPECT_EQ(t.blk.depth, K);
  }
}

TEST(AppendStage, DepthSkipRejected) {
  auto t = toy(0.3, 0.4, 1.0);
  EXPECT_THROW(append_rnf_stage(t.m, t.blk, 1), std::logic_error);
  append_rnf_stage(t.m, t.blk, 0);
  EXPECT_THROW(append_rnf_stage(t.m, t.blk, 0), std::logic_error);
}

TEST(AppendStage, AxisPointPropagates) {
  const double z = 2.0;
  auto t = toy(z, 0.0, z);
  extend_rnf(t.m, t.blk, 1);
  auto s = solve_lp(t.m);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  const auto& st0 = t.blk.stages[0];
  const auto& st1 = t.blk.stages[1];
  EXPECT_NEAR(s.x[static_cast<std::size_t>(st0.g)], z, 1e-9);
  EXPECT_NEAR(s.x[static_cast<std::size_t>(st0.h)], 0.0, 1e-9);
  EXPECT_NEAR(s.x[static_cast<std::size_t>(st1.g)], z * std::cos(kPi / 4), 1e-9);
  EXPECT_NEAR(s.x[static_cast<std::size_t>(st1.h)], z * std::sin(kPi / 4), 1e-9);
}

TEST(AppendStage, BigMArithmetic) {
  auto t = toy(-3.0, 0.0, 10.0, 10.0);
  append_rnf_stage(t.m, t.blk, 0);
  const auto& f = t.blk.stages[0].folds[0];
  t.m.set_bounds(f.beta, 0.0, 0.0);
  auto s = solve_lp(t.m);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.x[static_cast<std::size_t>(f.omega1)], 0.0, 1e-12);
  EXPECT_NEAR(s.x[static_cast<std::size_t>(f.omega2)], 0.3, 1e-12);
  EXPECT_NEAR(s.x[static_cast<std::size_t>(t.blk.stages[0].g)], 3.0, 1e-12);
  // the other sign is infeasible
  t.m.set_bounds(f.beta, 1.0, 1.0);
  EXPECT_EQ(solve_lp(t.m).status, LpStatus::Infeasible);
}

TEST(AppendTerminal, PrAtLevelZero) {
  auto t = toy(0.3, 0.4, 1.0);
  append_rnf_stage(t.m, t.blk, 0);
  const int before = t.m.num_rows();
  append_terminal(t.m, t.blk, 0, TerminalKind::PR);
  ASSERT_EQ(t.m.num_rows(), before + 3);
  const int g = t.blk.stages[0].g, h = t.blk.stages[0].h;
  const auto& r0 = t.m.row(before);
  EXPECT_DOUBLE_EQ(coef(r0, g), 1.0);
  EXPECT_DOUBLE_EQ(coef(r0, t.z), -1.0);
  EXPECT_EQ(r0.sense, Sense::LessEqual);
  const auto& r1 = t.m.row(before + 1);  // g cos(pi/2) + h sin(pi/2) <= z
  EXPECT_NEAR(coef(r1, g), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(coef(r1, h), 1.0);
  EXPECT_DOUBLE_EQ(coef(r1, t.z), -1.0);
  const auto& r2 = t.m.row(before + 2);  // z cos(pi/4) <= (g + h) cos(pi/4)
  EXPECT_NEAR(coef(r2, t.z), std::cos(kPi / 4), 1e-15);
  EXPECT_NEAR(coef(r2, g), -std::cos(kPi / 4), 1e-15);
  EXPECT_NEAR(coef(r2, h), -std::sin(kPi / 4), 1e-15);
  EXPECT_EQ(r2.sense, Sense::LessEqual);
  EXPECT_FALSE(t.blk.exact_soc);
}

TEST(AppendTerminal, QprAtLevelZero) {
  auto t = toy(0.3, 0.4, 1.0);
  append_rnf_stage(t.m, t.blk, 0);
  const int before = t.m.num_rows();
  append_terminal(t.m, t.blk, 0, TerminalKind::QPR);
  EXPECT_EQ(t.m.num_rows(), before + 1);
  EXPECT_TRUE(t.blk.exact_soc);
}

TEST(AppendTerminal, PaFacet) {
  auto t = toy(0.3, 0.4, 1.0);
  extend_rnf(t.m, t.blk, 1);
  const int before = t.m.num_rows();
  append_terminal(t.m, t.blk, 1, TerminalKind::PA);
  const auto& facet = t.m.row(before);
  EXPECT_EQ(facet.sense, Sense::Equal);
  EXPECT_DOUBLE_EQ(coef(facet, t.blk.stages[1].g), 1.0);
  EXPECT_NEAR(coef(facet, t.z), -std::cos(kPi / 4), 1e-15);

  auto t0 = toy(0.3, 0.4, 1.0);
  append_rnf_stage(t0.m, t0.blk, 0);
  EXPECT_THROW(append_terminal(t0.m, t0.blk, 0, TerminalKind::PA), std::invalid_argument);
  EXPECT_THROW(append_terminal(t.m, t.blk, 0, TerminalKind::PR), std::logic_error);
}

TEST(Tolerance, Values) {
  EXPECT_NEAR(tolerance(TerminalKind::PR, 0), 1.0, 1e-15);
  EXPECT_NEAR(tolerance(TerminalKind::PA, 4), 9.60e-3, 1e-5);
  EXPECT_LT(tolerance(TerminalKind::PA, 4), 0.01);
  EXPECT_NEAR(tolerance(TerminalKind::QPR, 3), std::pow(std::sin(kPi / 32), 2), 1e-18);
  EXPECT_LT(tolerance(TerminalKind::PR, 3), 0.01);
  EXPECT_THROW(tolerance(TerminalKind::PA, 0), std::invalid_argument);
}

TEST(RnfTrace, Origin) {
  for (const auto& l : rnf_trace(0, 0, 1, 3)) {
    EXPECT_EQ(l.g, 0.0);
    EXPECT_EQ(l.h, 0.0);
  }
}

TEST(RnfTrace, ThreeFourFive) {
  auto tr = rnf_trace(3, 4, 5, 2);
  ASSERT_EQ(tr.size(), 3u);
  EXPECT_EQ(tr[0].g, 3.0);
  EXPECT_EQ(tr[0].h, 4.0);
  EXPECT_NEAR(tr[1].g, 7.0 * std::cos(kPi / 4), 1e-14);
  EXPECT_NEAR(tr[1].g, 4.9497474683, 1e-9);
  EXPECT_NEAR(tr[1].h, std::cos(kPi / 4), 1e-14);
  EXPECT_NEAR(tr[2].g, tr[1].g * std::cos(kPi / 8) + tr[1].h * std::sin(kPi / 8), 1e-14);
  EXPECT_EQ(tr[0].beta, (std::vector<int>{1, 1}));
  EXPECT_EQ(tr[1].beta, (std::vector<int>{1}));
}

TEST(RnfTrace, PreservesNorm) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng);
    auto tr = rnf_trace(x, y, 1, 8);
    const double r2 = x * x + y * y;
    for (const auto& l : tr) EXPECT_NEAR(l.g * l.g + l.h * l.h, r2, 1e-12 * r2);
    // folded angle shrinks into [0, theta_K]
    EXPECT_LE(std::atan2(tr.back().h, tr.back().g), theta(8) + 1e-12);
  }
}

TEST(FillRnfValues, SatisfiesRows) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), y = u(rng), z = std::hypot(x, y);
    auto t = toy(x, y, z, 2.0);
    extend_rnf(t.m, t.blk, 4);
    append_terminal(t.m, t.blk, 4, TerminalKind::QPR);
    std::vector<double> pt(static_cast<std::size_t>(t.m.num_vars()), 0.0);
    pt[0] = x, pt[1] = y, pt[2] = z;
    fill_rnf_values(t.blk, pt);
    EXPECT_LE(t.m.max_violation(pt), 1e-12);
  }
}

TEST(PyramidOracle, Examples) {
  for (int K = 1; K <= 4; ++K) {
    const double N = std::pow(2.0, K + 1), z = 1.7;
    const double phi2 = 2.0 * kPi / N;
    EXPECT_TRUE(direct_pyramid_oracle(z * std::cos(phi2), z * std::sin(phi2), z, K));
    EXPECT_TRUE(direct_pyramid_oracle(0, 0, 0, K));
  }
  EXPECT_FALSE(direct_pyramid_oracle(0.9, 0, 1, 1));
  EXPECT_TRUE(direct_pyramid_oracle(0.5, 0.5, 1, 1));
  EXPECT_FALSE(direct_pyramid_oracle(0.0, 0.0, 1, 1));
}

TEST(PyramidEquivalence, RnfEqualsPyramidOnGrid) {
  for (int K = 1; K <= 3; ++K) EXPECT_EQ(props::pyramid_mismatches(K), 0) << "K=" << K;
}

TEST(TerminalRegion, ToleranceEnvelope) {
  for (auto kind : {TerminalKind::PA, TerminalKind::PR, TerminalKind::QPR})
    for (int K = kind == TerminalKind::PA ? 1 : 0; K <= 6; ++K) {
      auto env = props::tolerance_envelope(kind, K, 100000, 1234 + K);
      EXPECT_TRUE(env.ok()) << to_string(kind) << " K=" << K << " max " << env.max_rel << " tol " << env.tolerance;
    }
}

TEST(OuterFacet, HoldsAutomatically) {
  for (int K = 1; K <= 8; ++K) {
    long kept = 0;
    EXPECT_LE(props::outer_facet_worst(K, 100000, 77 + K, &kept), 1e-12) << "K=" << K;
    EXPECT_GT(kept, 0);
  }
}

TEST(Nesting, DeeperPrInsideShallower) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (auto kind : {TerminalKind::PR, TerminalKind::QPR})
    for (int K = 0; K <= 5; ++K) {
      int hits = 0;
      for (int i = 0; i < 20000; ++i) {
        const double x = u(rng), y = u(rng);
        if (!props::in_region(kind, K + 1, x, y, 1.0)) continue;
        ++hits;
        EXPECT_TRUE(props::in_region(kind, K, x, y, 1.0, 1e-10));
      }
      EXPECT_GT(hits, 0);
    }
}

TEST(InclusionChain, PaInsideQprInsidePr) {
  std::mt19937_64 rng(8);
  for (int K = 0; K <= 5; ++K) {
    const double t = theta(K + 1);
    std::uniform_real_distribution<double> uh(0.0, std::sin(t));
    for (int i = 0; i < 5000; ++i) {
      const auto [x, y] = props::unfold(std::cos(t), uh(rng), K + 1, rng);
      ASSERT_TRUE(props::in_region(TerminalKind::PA, K + 1, x, y, 1.0, 1e-10));
      EXPECT_TRUE(props::in_region(TerminalKind::QPR, K, x, y, 1.0, 1e-10));
      EXPECT_TRUE(props::in_region(TerminalKind::PR, K, x, y, 1.0, 1e-10));
    }
  }
}

TEST(RnfRows, ModelAgreesWithTraceMembership) {
  // some binary assignment makes the R&F + PR rows feasible at a fixed point
  // iff the trace satisfies the terminal rows
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.1, 1.1);
  for (int i = 0; i < 300; ++i) {
    const double x = u(rng), y = u(rng);
    const int K = i % 4;
    auto t = toy(x, y, 1.0, 2.0);
    extend_rnf(t.m, t.blk, K);
    append_terminal(t.m, t.blk, K, TerminalKind::PR);
    const auto bins = t.m.binaries();
    SimplexSolver solver(t.m);
    bool lp = false;
    for (unsigned mask = 0; mask < (1u << bins.size()) && !lp; ++mask) {
      for (std::size_t b = 0; b < bins.size(); ++b) solver.set_bounds(bins[b], (mask >> b) & 1u, (mask >> b) & 1u);
      lp = solver.solve().status == LpStatus::Optimal;
    }
    const bool member = props::in_region(TerminalKind::PR, K, x, y, 1.0, 1e-9);
    const bool member_loose = props::in_region(TerminalKind::PR, K, x, y, 1.0, 1e-6);
    if (member) EXPECT_TRUE(lp);
    if (!member_loose) EXPECT_FALSE(lp);
  }
}
