#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lp_oracle.hpp"
#include "grid_oracle.hpp"
#include "properties.hpp"
#include "rfopf/bnc.hpp"
#include "rfopf/rnf.hpp"

using namespace rfopf;

namespace {

SolveConfig exact_config() {
  SolveConfig cfg;
  cfg.gap = 1e-9;
  cfg.time_limit = 60.0;
  return cfg;
}

}  // namespace

TEST(Method, ParseRoundTrip) {
  for (Method m : {Method::SOCP, Method::PA, Method::PR, Method::QPR, Method::DPR, Method::DQPR})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(parse_method("DQPR"), Method::DQPR);
  EXPECT_THROW(parse_method("miqp"), std::invalid_argument);
}

TEST(BranchAndCut, PureLpIsOneNode) {
  LinearModel m;
  const int x = m.add_variable("x", 0, 4, -1.0);
  const int y = m.add_variable("y", 0, 4, -2.0);
  m.add_row(LinExpr::var(x) + LinExpr::var(y), Sense::LessEqual, 5.0);
  std::vector<SocBlock> blocks;
  auto r = branch_and_cut(m, blocks, nullptr, exact_config());
  ASSERT_TRUE(r.incumbent);
  EXPECT_EQ(r.report.status, SolveStatus::Optimal);
  EXPECT_EQ(r.report.nodes, 1);
  EXPECT_NEAR(r.report.objective, -9.0, 1e-9);
  EXPECT_NEAR(r.report.gap, 0.0, 1e-12);
}

TEST(BranchAndCut, Knapsack) {
  // max 5a + 4b + 3c s.t. 2a + 3b + c <= 4 (LP optimum fractional)
  LinearModel m;
  const int a = m.add_binary("a"), b = m.add_binary("b"), c = m.add_binary("c");
  m.set_objective(a, -5);
  m.set_objective(b, -4);
  m.set_objective(c, -3);
  m.add_row(LinExpr::var(a, 2) + LinExpr::var(b, 3) + LinExpr::var(c, 1), Sense::LessEqual, 4.0);
  std::vector<SocBlock> blocks;
  auto r = branch_and_cut(m, blocks, nullptr, exact_config());
  ASSERT_TRUE(r.incumbent);
  EXPECT_NEAR(r.report.objective, -8.0, 1e-9);
  EXPECT_NEAR(r.incumbent->x[a], 1.0, 1e-9);
  EXPECT_NEAR(r.incumbent->x[b], 0.0, 1e-9);
  EXPECT_NEAR(r.incumbent->x[c], 1.0, 1e-9);
  EXPECT_GT(r.report.nodes, 1);
}

TEST(BranchAndCut, InfeasibleMilp) {
  LinearModel m;
  const int a = m.add_binary("a"), b = m.add_binary("b");
  m.add_row(LinExpr::var(a) + LinExpr::var(b), Sense::Equal, 1.0);
  m.add_row(LinExpr::var(a) - LinExpr::var(b), Sense::Equal, 0.0);
  std::vector<SocBlock> blocks;
  auto r = branch_and_cut(m, blocks, nullptr, exact_config());
  EXPECT_FALSE(r.incumbent);
  EXPECT_EQ(r.report.status, SolveStatus::Infeasible);
}

TEST(BranchAndCut, RandomMilpsMatchEnumeration) {
  std::mt19937 rng(7);
  for (int t = 0; t < 50; ++t) {
    LinearModel m = oracle::random_lp(rng, 5, 4);
    for (int j = 0; j < 2; ++j) {
      m.variable(j).kind = VarKind::Binary;
      m.set_bounds(j, 0.0, 1.0);
    }
    const auto expect = oracle::enumerate_milp(m);
    std::vector<SocBlock> blocks;
    auto r = branch_and_cut(m, blocks, nullptr, exact_config());
    ASSERT_EQ(r.incumbent.has_value(), expect.has_value()) << "instance " << t;
    if (!expect) continue;
    EXPECT_NEAR(r.report.objective, *expect, 1e-7) << "instance " << t;
    EXPECT_LE(m.max_violation(r.incumbent->x), 1e-7);
  }
}

TEST(BranchAndCut, LazyCallbackRejects) {
  LinearModel m;
  const int a = m.add_binary("a"), b = m.add_binary("b");
  m.set_objective(a, -2);
  m.set_objective(b, -1);
  std::vector<SocBlock> blocks;
  int calls = 0;
  LazyCallback cb = [&](LinearModel& model, std::vector<SocBlock>&, std::span<const double> x) {
    ++calls;
    if (x[a] + x[b] > 1.5) {
      model.add_row(LinExpr::var(a) + LinExpr::var(b), Sense::LessEqual, 1.0);
      return true;
    }
    return false;
  };
  auto r = branch_and_cut(m, blocks, cb, exact_config());
  ASSERT_TRUE(r.incumbent);
  EXPECT_NEAR(r.report.objective, -2.0, 1e-9);
  EXPECT_EQ(r.report.checks, calls);
  EXPECT_GE(calls, 2);
}

TEST(BranchAndCut, WarmStartRecorded) {
  LinearModel m;
  const int a = m.add_binary("a"), b = m.add_binary("b");
  m.set_objective(a, -2);
  m.set_objective(b, -1);
  m.add_row(LinExpr::var(a) + LinExpr::var(b), Sense::LessEqual, 1.0);
  std::vector<SocBlock> blocks;
  auto r = branch_and_cut(m, blocks, nullptr, exact_config(), std::vector<double>{0.0, 1.0});
  ASSERT_FALSE(r.report.incumbents.empty());
  EXPECT_EQ(r.report.incumbents.front().origin, IncumbentOrigin::WarmStart);
  EXPECT_NEAR(r.report.incumbents.front().objective, -1.0, 1e-12);
  EXPECT_NEAR(r.report.objective, -2.0, 1e-9);

  auto bad = branch_and_cut(m, blocks, nullptr, exact_config(), std::vector<double>{1.0, 1.0});
  ASSERT_FALSE(bad.report.incumbents.empty());
  EXPECT_EQ(bad.report.incumbents.front().origin, IncumbentOrigin::Node);
}

TEST(SocSeparation, Examples) {
  LinearModel m;
  const int x = m.add_variable("x", -10, 10), y = m.add_variable("y", -10, 10), z = m.add_variable("z", 0, 10);
  SocBlock b;
  b.x = LinExpr::var(x);
  b.y = LinExpr::var(y);
  b.z = LinExpr::var(z);
  const std::vector<double> inside{0.6, 0.8, 1.0};
  EXPECT_FALSE(soc_separation(b, inside));
  const std::vector<double> outside{3.0, 4.0, 1.0};
  auto cut = soc_separation(b, outside);
  ASSERT_TRUE(cut);
  // 0.6 x + 0.8 y - z: value 4 at the point, 0 on the ray through it
  EXPECT_NEAR(cut->evaluate(outside), 4.0, 1e-12);
  const std::vector<double> on_ray{0.6, 0.8, 1.0};
  EXPECT_NEAR(cut->evaluate(on_ray), 0.0, 1e-12);
  const std::vector<double> tiny{1.0 + 1e-9, 0.0, 1.0};
  EXPECT_FALSE(soc_separation(b, tiny));
}

TEST(SocSeparation, ConeMinimumMatchesClosedForm) {
  // min z s.t. ||(x, y)|| <= z, x = 3, y = 4
  LinearModel m;
  const int x = m.add_variable("x", 3, 3), y = m.add_variable("y", 4, 4), z = m.add_variable("z", 0, 10, 1.0);
  SocBlock b;
  b.id = 0;
  b.x = LinExpr::var(x);
  b.y = LinExpr::var(y);
  b.z = LinExpr::var(z);
  b.exact_soc = true;
  std::vector<SocBlock> blocks{b};
  auto r = branch_and_cut(m, blocks, nullptr, exact_config());
  ASSERT_TRUE(r.incumbent);
  EXPECT_NEAR(r.report.objective, 5.0, 5e-7);
  EXPECT_GT(r.report.tangent_cuts, 0);
}

TEST(BranchAndCut, TwoBusSocpMatchesFixedPoint) {
  auto c = fixtures::two_bus(10.0, 0.0);
  auto bm = build_base_model(c);
  for (auto& b : bm.blocks) b.exact_soc = true;
  auto r = branch_and_cut(bm.model, bm.blocks, nullptr, exact_config());
  ASSERT_TRUE(r.incumbent);

  // Independent: W1 at its upper bound, Q = x Phi, P = pd + r Phi,
  // Phi = (P^2 + Q^2) / W1 solved by fixed-point iteration.
  const double rr = 0.01, xx = 0.1, pd = 0.1, w1 = 1.1 * 1.1;
  double phi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double p = pd + rr * phi, q = xx * phi;
    phi = (p * p + q * q) / w1;
  }
  const double expect = 1000.0 * (pd + rr * phi);
  EXPECT_NEAR(r.report.objective, expect, 1e-6 * expect);
  EXPECT_LE(r.report.incumbent_row_violation, 1e-7);
}

TEST(BranchAndCut, TwoBusSocpMatchesGridSearch) {
  const auto expect = oracle::two_bus_grid_optimum(oracle::TwoBus{});
  ASSERT_TRUE(expect);
  auto c = fixtures::two_bus(10.0, 0.0);
  auto bm = build_base_model(c);
  for (auto& b : bm.blocks) b.exact_soc = true;
  auto r = branch_and_cut(bm.model, bm.blocks, nullptr, exact_config());
  ASSERT_TRUE(r.incumbent);
  EXPECT_NEAR(r.report.objective, *expect, 1e-4 * *expect);
}

TEST(BranchAndCut, RnfTerminalsGiveIntegerFeasiblePoints) {
  // min z on a PR / PA encoding of a fixed point (x, y) = (0.3, 0.4)
  for (TerminalKind kind : {TerminalKind::PR, TerminalKind::PA}) {
    LinearModel m;
    const int x = m.add_variable("x", 0.3, 0.3), y = m.add_variable("y", 0.4, 0.4);
    const int z = m.add_variable("z", 0.0, 1.0, 1.0);
    std::vector<SocBlock> blocks(1);
    auto& b = blocks[0];
    b.id = 0;
    b.x = LinExpr::var(x);
    b.y = LinExpr::var(y);
    b.z = LinExpr::var(z);
    b.z_max = 1.0;
    b.big_m = 1.0;
    const int K = 3;
    extend_rnf(m, b, K);
    append_terminal(m, b, K, kind);
    auto r = branch_and_cut(m, blocks, nullptr, exact_config());
    ASSERT_TRUE(r.incumbent) << to_string(kind);
    EXPECT_LE(m.max_violation(r.incumbent->x), 1e-6);
    const double zk = r.report.objective;
    // region membership via the independent fold check
    const double rel = std::abs(0.25 - zk * zk) / (zk * zk);
    EXPECT_LE(rel, tolerance(kind, K) + 1e-6) << to_string(kind);
    const auto f = props::fold(0.3, 0.4, K);
    const double tK = theta(K);
    double expect = f.g.back() / std::cos(tK);
    if (kind == TerminalKind::PR) {
      expect = std::max(f.h[0], f.g.back() * std::cos(tK) + f.h.back() * std::sin(tK));
      for (double g : f.g) expect = std::max(expect, g);
    }
    EXPECT_NEAR(zk, expect, 1e-7) << to_string(kind);
  }
}
