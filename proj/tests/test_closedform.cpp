#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cascade/closedform.hpp"
#include "support.hpp"

using namespace cascade;
using namespace testing_support;

TEST(OneInterface, ZeroSupercoolingGivesLogProfile) {
  const auto sol = solve_one_interface(one_interface(0.0, 1.0));
  EXPECT_NEAR(sol.x_star, 1.0, 1e-9);
  EXPECT_NEAR(sol.w(0.5), std::log(2.0), 1e-8);
  for (double x : {0.01, 0.2, 0.7, 0.95}) EXPECT_NEAR(sol.w(x), one_interface_w(x, 1.0, 1.0), 1e-8) << x;
  EXPECT_TRUE(std::isinf(sol.w(1.2)));
  EXPECT_EQ(sol.w(-0.3), 0.0);
}

TEST(OneInterface, ConstantSupercoolingScalesTheExtent) {
  const auto sol = solve_one_interface(one_interface(-0.5, 1.0));
  EXPECT_NEAR(sol.x_star, 2.0, 1e-9);
  for (double x : {0.1, 1.0, 1.9}) EXPECT_NEAR(sol.w(x), one_interface_w(x, 1.0, 0.5), 1e-8) << x;
}

TEST(OneInterface, CriticalSupercoolingNeverStops) {
  const auto sol = solve_one_interface(one_interface(-1.0, 2.0));
  EXPECT_TRUE(std::isinf(sol.x_star));
  EXPECT_NEAR(sol.w(3.0), 1.5, 1e-9);
}

TEST(OneInterface, PiecewiseProfileMatchesQuadratureOracle) {
  ScenarioSpec s = one_interface(0.0, 1.0);
  s.u = UField::piecewise(Profile1D({0.4}, {-0.8, 0.5}));
  const auto sol = solve_one_interface(s);
  // V = 1 - 0.2 x on [0, 0.4], then 0.92 - 1.5 (x - 0.4).
  EXPECT_NEAR(sol.x_star, 0.4 + 0.92 / 1.5, 1e-9);
  const double w1 = simpson([](double z) { return 1.0 / (1.0 - 0.2 * z); }, 0.0, 0.4) +
                    simpson([](double z) { return 1.0 / (0.92 - 1.5 * (z - 0.4)); }, 0.4, 0.9);
  EXPECT_NEAR(sol.w(0.9), w1, 1e-8);
}

TEST(OneInterface, ManyPointEvaluationAgreesWithPointwise) {
  const auto sol = solve_one_interface(one_interface(0.0, 1.0));
  std::vector<double> xs{0.9, -1.0, 0.1, 0.5, 1.5, 0.3};
  const auto ws = sol.w_many(xs);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (std::isinf(sol.w(xs[k]))) EXPECT_TRUE(std::isinf(ws[k]));
    else EXPECT_NEAR(ws[k], sol.w(xs[k]), 1e-10);
  }
}

TEST(OneInterface, ArrivalTimeIsMonotone) {
  const auto sol = solve_one_interface(one_interface(-0.3, 0.8));
  double prev = 0.0;
  for (double x = 0.0; x < sol.x_star; x += sol.x_star / 97.0) {
    const double w = sol.w(x);
    EXPECT_GE(w, prev);
    prev = w;
  }
}

TEST(JumpSize, PiecewiseProfile) {
  const auto j = jump_size_1d(Profile1D({0.3}, {-2.0, 0.0}));
  EXPECT_NEAR(j.value, 0.6, 1e-8);
}

TEST(JumpSize, NoSupercoolingMeansNoJump) { EXPECT_NEAR(jump_size_1d(Profile1D(0.0)).value, 0.0, 1e-12); }

TEST(JumpSize, CriticalSupercoolingIsInfinite) { EXPECT_TRUE(std::isinf(jump_size_1d(Profile1D(-1.0)).value)); }

TEST(JumpSize, MatchesFirstZeroOfTheBalance) {
  const Profile1D u({0.4, 1.0}, {-1.5, -0.5, 0.0});
  // On [0.4, 1): -int_0^z u - z = 0.4 - 0.5 z, zero at 0.8.
  EXPECT_NEAR(jump_size_1d(u).value, 0.8, 1e-8);
}

TEST(TwoInterface, SymmetricLockIn) {
  const auto sol = solve_two_interface(two_interface(0.0, 0.6));
  ASSERT_TRUE(sol.locked_energy.has_value());
  EXPECT_NEAR(*sol.locked_energy, 2.2, 1e-8);
  EXPECT_NEAR(sol.crossing, 0.5, 1e-9);
  EXPECT_NEAR(sol.t_star, one_interface_w(0.5, 0.6, 1.0), 1e-8);
}

TEST(TwoInterface, FrontsThatStopApartLockNothing) {
  const auto sol = solve_two_interface(two_interface(0.0, 0.3));
  EXPECT_FALSE(sol.locked_energy.has_value());
  EXPECT_NEAR(sol.x0_star, 0.3, 1e-9);
  EXPECT_NEAR(sol.x1_star, 0.7, 1e-9);
  EXPECT_TRUE(std::isinf(sol.t_star));
}

TEST(TwoInterface, AsymmetricSpeedsMoveTheMeetingPoint) {
  ScenarioSpec s = two_interface(0.0, 0.0);
  s.v0.kind = V0Kind::sides;
  s.v0.left = 0.9;
  s.v0.right = 0.6;
  const auto sol = solve_two_interface(s);
  ASSERT_TRUE(std::isfinite(sol.crossing));
  EXPECT_NEAR(one_interface_w(sol.crossing, 0.9, 1.0), one_interface_w(1.0 - sol.crossing, 0.6, 1.0), 1e-8);
  EXPECT_NEAR(*sol.locked_energy, 2.0 + 0.9 + 0.6 - 1.0, 1e-12);
}

TEST(Radial, GrowingDiskBenchmark) {
  const auto sol = solve_radial(disk(RegionKind::ball, -1.0, 1.0));
  EXPECT_NEAR(sol.r_star, 2.0, 1e-9);
  EXPECT_NEAR(sol.w(1.5), 2.0 * std::log(2.0) - 0.5, 1e-8);
  for (double r : {1.1, 1.7, 1.95}) EXPECT_NEAR(sol.w(r), radial_w(1.0, r, 1.0, 1.0, 1.0), 1e-7) << r;
}

TEST(Radial, ShrinkingDiskVanishes) {
  const auto sol = solve_radial(disk(RegionKind::ball_complement, -1.0, 1.0));
  EXPECT_EQ(sol.r_star, 0.0);
  ASSERT_TRUE(sol.locked_energy.has_value());
  EXPECT_NEAR(*sol.locked_energy, 2.0, 1e-12);
  EXPECT_NEAR(sol.w(0.0), 2.0 * std::log(2.0) - 1.0, 1e-8);
}

TEST(Radial, GrowingBallInThreeDimensions) {
  ScenarioSpec s = disk(RegionKind::ball, -1.0, 1.0);
  s.dimension = 3;
  const auto sol = solve_radial(s);
  EXPECT_NEAR(sol.r_star, std::sqrt(2.0), 1e-9);
  const double oracle = simpson([](double z) { return z * z / (2.0 - z * z); }, 1.0, 1.2);
  EXPECT_NEAR(sol.w(1.2), oracle, 1e-7);
}

TEST(Radial, ProfileCsvHasHeaderAndOneRowPerCoordinate) {
  const auto sol = solve_radial(disk(RegionKind::ball, -1.0, 1.0));
  std::ostringstream os;
  write_profile_csv(os, sol, {1.0, 1.5, 2.5});
  std::string line;
  std::istringstream is(os.str());
  std::getline(is, line);
  EXPECT_EQ(line, "coordinate,w,V");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_NE(os.str().find("inf"), std::string::npos);
}
