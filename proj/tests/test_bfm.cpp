#include <gtest/gtest.h>

#include <cmath>
#include <json.hpp>
#include <numbers>

#include "fixtures.hpp"
#include "rfopf/bfm.hpp"
#include "rfopf/lp.hpp"

using namespace rfopf;

namespace {

std::vector<double> point_for(const BfmModel& b, double P, double Q, double S, double Phi, double W) {
  std::vector<double> x(static_cast<std::size_t>(b.model.num_vars()), 0.0);
  x[static_cast<std::size_t>(b.vars.P[0])] = P;
  x[static_cast<std::size_t>(b.vars.Q[0])] = Q;
  x[static_cast<std::size_t>(b.vars.S[0])] = S;
  x[static_cast<std::size_t>(b.vars.Phi[0])] = Phi;
  x[static_cast<std::size_t>(b.vars.W[0])] = W;  // from bus of branch 1
  return x;
}

}  // namespace

TEST(BuildBaseModel, TwoBusRowCounts) {
  auto b = build_base_model(fixtures::two_bus());
  EXPECT_EQ(b.model.count_rows(RowTag::PowerBalanceP), 2);
  EXPECT_EQ(b.model.count_rows(RowTag::PowerBalanceQ), 2);
  EXPECT_EQ(b.model.count_rows(RowTag::VoltageDrop), 1);
  EXPECT_EQ(b.model.count_rows(RowTag::AngleMin) + b.model.count_rows(RowTag::AngleMax), 2);
  EXPECT_EQ(b.blocks.size(), 2u);
  EXPECT_EQ(b.model.num_rows(), 7);
  EXPECT_TRUE(b.model.binaries().empty());
}

TEST(BuildBaseModel, RowCountFormula) {
  for (const char* f : {"pglib_opf_case5_pjm.m", "case30_ieee.m", "case118_ieee.m"}) {
    auto c = load_case(fixtures::data_path(f));
    auto b = build_base_model(c);
    const auto N = static_cast<int>(c.buses.size()), L = static_cast<int>(c.branches.size()),
               G = static_cast<int>(c.generators.size());
    EXPECT_EQ(b.model.num_rows(), 2 * N + 3 * L) << f;
    EXPECT_EQ(b.model.num_vars(), N + 2 * G + 4 * L) << f;
    EXPECT_EQ(b.blocks.size(), static_cast<std::size_t>(2 * L)) << f;
  }
}

TEST(BuildBaseModel, Case5Has12Blocks) {
  auto b = build_base_model(load_case(fixtures::data_path("pglib_opf_case5_pjm.m")));
  EXPECT_EQ(b.blocks.size(), 12u);
  for (std::size_t k = 0; k < b.blocks.size(); ++k) {
    const auto& blk = b.blocks[k];
    EXPECT_EQ(blk.id, static_cast<int>(k));
    EXPECT_GT(blk.z_max, 0.0);
    EXPECT_GE(blk.big_m, blk.z_max);
    EXPECT_EQ(blk.depth, -1);
  }
  // power cone bound is the rating; current-voltage bound uses Phi_max = (s_max / v_min)^2
  EXPECT_DOUBLE_EQ(b.blocks[0].z_max, 4.0);
  EXPECT_NEAR(b.blocks[1].z_max, (1.21 + std::pow(4.0 / 0.9, 2)) / 2.0, 1e-12);
}

TEST(BuildBaseModel, VariableBounds) {
  auto c = load_case(fixtures::data_path("pglib_opf_case5_pjm.m"));
  auto b = build_base_model(c);
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const auto& v = b.model.variable(b.vars.W[i]);
    EXPECT_DOUBLE_EQ(v.lb, 0.81);
    EXPECT_DOUBLE_EQ(v.ub, 1.21);
  }
  for (std::size_t l = 0; l < c.branches.size(); ++l) {
    EXPECT_EQ(b.model.variable(b.vars.S[l]).lb, 0.0);
    EXPECT_DOUBLE_EQ(b.model.variable(b.vars.S[l]).ub, c.branches[l].s_max);
    EXPECT_EQ(b.model.variable(b.vars.Phi[l]).lb, 0.0);
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g)
    EXPECT_DOUBLE_EQ(b.model.variable(b.vars.p_g[g]).ub, c.generators[g].p_max);
}

TEST(BuildBaseModel, ZeroDemandLpIsFree) {
  auto c = fixtures::two_bus(0.0, 0.0);
  auto b = build_base_model(c);
  auto s = solve_lp(b.model);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective, 0.0, 1e-9);
  for (int v : {b.vars.P[0], b.vars.Q[0], b.vars.S[0], b.vars.Phi[0]})
    EXPECT_NEAR(s.x[static_cast<std::size_t>(v)], 0.0, 1e-9);
}

TEST(BuildBaseModel, LpRelaxationBoundsLoad) {
  // without cones the LP still has to serve the 10 MW load at 10 $/MWh
  auto b = build_base_model(fixtures::two_bus());
  auto s = solve_lp(b.model);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_GE(s.objective, 100.0 - 1e-6);
}

TEST(ConicErrors, ExactSurfaceIsZero) {
  auto b = build_base_model(fixtures::two_bus());
  auto x = point_for(b, 3, 4, 5, 25, 1);
  auto rep = conic_errors(x, b.blocks);
  ASSERT_EQ(rep.blocks.size(), 2u);
  ASSERT_EQ(rep.branches.size(), 1u);
  EXPECT_EQ(rep.rel_inf, 0.0);
  EXPECT_EQ(rep.abs_1, 0.0);
  EXPECT_EQ(rep.block_rel_inf, 0.0);
  EXPECT_TRUE(epsilon_feasible(x, b.blocks, 1e-6).feasible);
}

TEST(ConicErrors, FourDimensionalArithmetic) {
  auto b = build_base_model(fixtures::two_bus());
  auto x = point_for(b, 1, 0, 1, 1, 2);
  auto rep = conic_errors(x, b.blocks);
  EXPECT_DOUBLE_EQ(rep.branches[0].abs, 1.0);
  EXPECT_NEAR(rep.branches[0].rel, 1.0 / (2.25 + kDefaultEta), 1e-15);
  EXPECT_NEAR(rep.rel_inf, 0.4444444, 1e-6);
  EXPECT_DOUBLE_EQ(rep.abs_inf, 1.0);
  EXPECT_DOUBLE_EQ(rep.abs_1, 1.0);
  auto eps = epsilon_feasible(x, b.blocks, 0.01);
  EXPECT_FALSE(eps.feasible);
  EXPECT_EQ(eps.worst_block, 1);  // the current-voltage block carries the error
  EXPECT_NEAR(eps.worst_rel, 1.0 / (2.25 + kDefaultEta), 1e-15);
}

TEST(ConicErrors, SignedGapClassifiesInsideOutside) {
  auto b = build_base_model(fixtures::two_bus());
  auto inside = point_for(b, 0.9, 0, 1, 0.81, 1);
  auto outside = point_for(b, 1.1, 0, 1, 1.21, 1);
  EXPECT_LT(conic_errors(inside, b.blocks).blocks[0].signed_gap, 0.0);
  EXPECT_GT(conic_errors(outside, b.blocks).blocks[0].signed_gap, 0.0);
}

TEST(EpsilonFeasible, TanSquaredPiOver32) {
  auto b = build_base_model(fixtures::two_bus());
  const double t = std::pow(std::tan(std::numbers::pi / 32), 2);
  EXPECT_NEAR(t, 9.7006e-3, 1e-6);
  EXPECT_LT(t, 0.01);
  // power block at relative error t, current-voltage block exact
  const double S = 1.0, P = std::sqrt(1.0 + t);
  auto x = point_for(b, P, 0, S, 1, 1);
  auto eps = epsilon_feasible(x, b.blocks, 0.01);
  EXPECT_TRUE(eps.feasible);
  EXPECT_EQ(eps.worst_block, 0);
  EXPECT_NEAR(eps.worst_rel, t, 1e-9);
}

TEST(ConicErrors, JsonRoundTrip) {
  auto b = build_base_model(fixtures::two_bus());
  auto rep = conic_errors(point_for(b, 1, 0, 1, 1, 2), b.blocks);
  auto j = nlohmann::json::parse(rep.to_json());
  EXPECT_DOUBLE_EQ(j["abs_1"].get<double>(), rep.abs_1);
  EXPECT_EQ(j["blocks"].size(), 2u);
  EXPECT_EQ(j["branches"].size(), 1u);
  EXPECT_DOUBLE_EQ(j["eta"].get<double>(), kDefaultEta);
}

TEST(BuildBaseModel, UnlimitedFlowSubstituted) {
  auto c = fixtures::two_bus();
  auto b = build_base_model(c);
  EXPECT_DOUBLE_EQ(b.blocks[0].z_max, unlimited_flow_bound(c));
}
