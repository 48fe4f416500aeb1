#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "fixtures.hpp"
#include "rfopf/case_io.hpp"

using namespace rfopf;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_same(const NetworkCase& a, const NetworkCase& b) {
  ASSERT_EQ(a.buses.size(), b.buses.size());
  ASSERT_EQ(a.branches.size(), b.branches.size());
  ASSERT_EQ(a.generators.size(), b.generators.size());
  EXPECT_EQ(a.base_mva, b.base_mva);
  for (std::size_t i = 0; i < a.buses.size(); ++i) {
    const auto &x = a.buses[i], &y = b.buses[i];
    EXPECT_EQ(x.id, y.id);
    EXPECT_EQ(x.type, y.type);
    EXPECT_EQ(x.p_d, y.p_d);
    EXPECT_EQ(x.q_d, y.q_d);
    EXPECT_EQ(x.g_s, y.g_s);
    EXPECT_EQ(x.b_s, y.b_s);
    EXPECT_EQ(x.v_min, y.v_min);
    EXPECT_EQ(x.v_max, y.v_max);
    EXPECT_EQ(x.v_set, y.v_set);
  }
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    const auto &x = a.branches[i], &y = b.branches[i];
    EXPECT_EQ(x.from_bus, y.from_bus);
    EXPECT_EQ(x.to_bus, y.to_bus);
    EXPECT_EQ(x.r, y.r);
    EXPECT_EQ(x.x, y.x);
    EXPECT_EQ(x.b_c, y.b_c);
    EXPECT_EQ(x.tap, y.tap);
    EXPECT_EQ(x.s_max, y.s_max);
    EXPECT_EQ(x.ang_min, y.ang_min);
    EXPECT_EQ(x.ang_max, y.ang_max);
    EXPECT_EQ(x.in_service, y.in_service);
  }
  for (std::size_t i = 0; i < a.generators.size(); ++i) {
    const auto &x = a.generators[i], &y = b.generators[i];
    EXPECT_EQ(x.bus, y.bus);
    EXPECT_EQ(x.p_min, y.p_min);
    EXPECT_EQ(x.p_max, y.p_max);
    EXPECT_EQ(x.q_min, y.q_min);
    EXPECT_EQ(x.q_max, y.q_max);
    EXPECT_EQ(x.c1, y.c1);
    EXPECT_EQ(x.c0, y.c0);
    EXPECT_EQ(x.v_set, y.v_set);
    EXPECT_EQ(x.status, y.status);
  }
}

}  // namespace

TEST(ParseCase, TwoBusFixture) {
  auto c = fixtures::two_bus();
  EXPECT_EQ(c.buses.size(), 2u);
  EXPECT_EQ(c.branches.size(), 1u);
  EXPECT_EQ(c.generators.size(), 1u);
  EXPECT_DOUBLE_EQ(c.buses[1].p_d, 0.1);
  EXPECT_DOUBLE_EQ(c.branches[0].r, 0.01);
  EXPECT_DOUBLE_EQ(c.branches[0].x, 0.1);
  EXPECT_DOUBLE_EQ(c.generators[0].c1, 1000.0);  // 10 $/MWh on a 100 MVA base
  EXPECT_NEAR(c.branches[0].ang_max, M_PI / 6, 1e-15);
  EXPECT_EQ(c.branches[0].tap, 1.0);
}

TEST(ParseCase, Case5Counts) {
  auto c = load_case(fixtures::data_path("pglib_opf_case5_pjm.m"));
  EXPECT_EQ(c.buses.size(), 5u);
  EXPECT_EQ(c.branches.size(), 6u);
  EXPECT_EQ(c.generators.size(), 5u);
  EXPECT_EQ(c.name, "pglib_opf_case5_pjm");
}

TEST(ParseCase, PerUnitConsistency) {
  // independent oracle: regex scan of the raw gen matrix
  for (const char* f : {"pglib_opf_case5_pjm.m", "case30_ieee.m"}) {
    const auto text = read_file(fixtures::data_path(f));
    auto c = parse_case(text);
    const auto start = text.find("mpc.gen = [");
    const auto end = text.find("];", start);
    std::stringstream block(text.substr(start + 11, end - start - 11));
    std::string line;
    std::size_t g = 0;
    while (std::getline(block, line)) {
      std::stringstream ls(line);
      std::vector<double> v;
      double d;
      while (ls >> d) v.push_back(d);
      if (v.size() < 10) continue;
      ASSERT_LT(g, c.generators.size());
      EXPECT_NEAR(c.generators[g].p_max * c.base_mva, v[8], 1e-9) << f;
      ++g;
    }
    EXPECT_EQ(g, c.generators.size());
  }
}

TEST(ParseCase, QuadraticCostRejected) {
  auto text = fixtures::two_bus_text();
  text = std::regex_replace(text, std::regex("2 0 0 2 10 0;"), "2 0 0 3 0.02 10 0;");
  EXPECT_THROW(parse_case(text), UnsupportedCostError);
}

TEST(ParseCase, ZeroQuadraticAccepted) {
  auto text = std::regex_replace(fixtures::two_bus_text(), std::regex("2 0 0 2 10 0;"), "2 0 0 3 0 10 5;");
  auto c = parse_case(text);
  EXPECT_DOUBLE_EQ(c.generators[0].c1, 1000.0);
  EXPECT_DOUBLE_EQ(c.generators[0].c0, 5.0);
}

TEST(ParseCase, PiecewiseCostRejected) {
  auto text = std::regex_replace(fixtures::two_bus_text(), std::regex("2 0 0 2 10 0;"), "1 0 0 2 0 0 100 10;");
  EXPECT_THROW(parse_case(text), UnsupportedCostError);
}

TEST(ParseCase, MalformedRowReportsLine) {
  auto text = std::regex_replace(fixtures::two_bus_text(), std::regex("0.01 0.1"), "0.01 abc");
  try {
    parse_case(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 15);
  }
}

TEST(ParseCase, MissingSlackRejected) {
  auto text = std::regex_replace(fixtures::two_bus_text(), std::regex("1 3 0 0"), "1 2 0 0");
  EXPECT_THROW(parse_case(text), ValidationError);
}

TEST(ParseCase, AngleLimitsClipped) {
  auto text = std::regex_replace(fixtures::two_bus_text(), std::regex("-30 30"), "-360 360");
  auto c = parse_case(text);
  EXPECT_DOUBLE_EQ(c.branches[0].ang_max, kMaxAngleDifference);
  EXPECT_DOUBLE_EQ(c.branches[0].ang_min, -kMaxAngleDifference);
}

TEST(ParseCase, ZeroTapMeansNominal) {
  auto c = load_case(fixtures::data_path("case30_ieee.m"));
  int taps = 0;
  for (const auto& br : c.branches) {
    EXPECT_GT(br.tap, 0.0);
    if (br.tap != 1.0) ++taps;
  }
  EXPECT_EQ(taps, 4);
}

TEST(ValidateCase, WellFormedFixtureIsClean) {
  auto c = fixtures::two_bus();
  c.branches[0].s_max = 1.0;
  EXPECT_TRUE(validate_case(c).empty());
}

TEST(ValidateCase, VoltageBoundInversion) {
  auto c = fixtures::two_bus();
  c.branches[0].s_max = 1.0;
  c.buses[1].v_min = 1.2;
  auto d = validate_case(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::Error);
  EXPECT_TRUE(has_errors(d));
}

TEST(ValidateCase, UnlimitedFlowWarning) {
  auto c = fixtures::two_bus();  // rateA = 0
  auto d = validate_case(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::Warning);
  EXPECT_FALSE(has_errors(d));
  const double expected = 2.0 * (0.1 + 0.0) + 2.0;
  EXPECT_DOUBLE_EQ(unlimited_flow_bound(c), expected);
  EXPECT_DOUBLE_EQ(flow_limit(c, c.branches[0]), expected);
  EXPECT_NE(d[0].message.find("using s_max"), std::string::npos);
}

TEST(ValidateCase, DisconnectedWarning) {
  auto c = fixtures::two_bus();
  c.branches[0].s_max = 1.0;
  Bus island;
  island.id = 7;
  c.buses.push_back(island);
  auto d = validate_case(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::Warning);
}

TEST(ValidateCase, BundledFixturesHaveNoErrors) {
  for (const char* f : {"pglib_opf_case5_pjm.m", "case30_ieee.m", "case118_ieee.m"}) {
    auto c = load_case(fixtures::data_path(f));
    EXPECT_FALSE(has_errors(validate_case(c))) << f;
  }
}

TEST(WriteCase, RoundTripIsExact) {
  for (const char* f : {"pglib_opf_case5_pjm.m", "case30_ieee.m", "case118_ieee.m"}) {
    auto c = load_case(fixtures::data_path(f));
    auto again = parse_case(write_case(c), c.name);
    expect_same(c, again);
    EXPECT_EQ(write_case(again), write_case(c));
  }
  auto c = fixtures::two_bus();
  expect_same(c, parse_case(write_case(c)));
}
