#include <gtest/gtest.h>

#include <cmath>

#include "cascade/eikonal.hpp"
#include "support.hpp"

using namespace cascade;
using namespace testing_support;

namespace {

RegionSpec unit_ball(double r) {
  RegionSpec b;
  b.kind = RegionKind::ball;
  b.radius = r;
  return b;
}

}  // namespace

TEST(FastMarch, UnitCostGivesDistanceToTheDisk) {
  const Grid2 g = square(1.0, 0.01).make();
  const auto mask = rasterize(unit_ball(0.3), g);
  const auto w = fast_march(mask, constant_cost(g, 1.0));
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = norm(g.center(k));
    if (r > 0.35 && r < 0.9) worst = std::max(worst, std::abs(w.values[k] - (r - 0.3)));
  }
  EXPECT_LT(worst, 0.02);
}

TEST(FastMarch, PlanarFrontIsExactAlongTheAxis) {
  const Grid2 g = strip(0.0, 1.0, 0.01).make();
  RegionSpec half;
  half.kind = RegionKind::half_line;
  half.left = 0.2;
  const auto mask = rasterize(half, g);
  const auto w = fast_march(mask, constant_cost(g, 2.0));
  for (int i = 30; i < g.nx; i += 10) {
    const double x = g.center(i, 3).x;
    EXPECT_NEAR(w.at(i, 3), 2.0 * (x - 0.2), 2e-2) << x;
  }
}

TEST(FastMarch, RecoversTheOneInterfaceArrivalTime) {
  const auto spec = one_interface(0.0, 1.0);
  const Grid2 g = strip(-0.05, 1.05, 0.002).make();
  const auto w = fast_march(rasterize(spec.initial, g), closed_form_cost(spec, g, 0.0));
  const auto exact = closed_form_field(spec, g, 0.0);
  for (double x : {0.2, 0.5, 0.8}) {
    const int i = static_cast<int>((x + 0.05) / g.h);
    EXPECT_NEAR(w.at(i, 5), exact.w.at(i, 5), 5e-3) << x;
  }
}

TEST(FastMarch, CostOrderIsPreserved) {
  const Grid2 g = square(1.0, 0.04).make();
  const auto mask = rasterize(unit_ball(0.3), g);
  ScalarField2 lo(g, 1.0);
  ScalarField2 hi(g, 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) hi.values[k] += 0.5 * std::abs(std::sin(7.0 * g.center(k).x));
  const auto wl = fast_march(mask, {lo});
  const auto wh = fast_march(mask, {hi});
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_LE(wl.values[k], wh.values[k] + 1e-12);
}

TEST(FastMarch, InfiniteCostBlocksPropagation) {
  const Grid2 g = strip(0.0, 1.0, 0.05, 4).make();
  RegionSpec half;
  half.kind = RegionKind::half_line;
  half.left = 0.1;
  ScalarField2 L(g, 1.0);
  for (int j = 0; j < g.ny; ++j) L.at(10, j) = kUnreached;
  const auto w = fast_march(rasterize(half, g), {L});
  EXPECT_TRUE(std::isfinite(w.at(9, 0)));
  EXPECT_TRUE(is_unreached(w.at(15, 0)));
}

TEST(FastMarch, RejectsMismatchedCost) {
  const Grid2 g = square(1.0, 0.1).make();
  const Grid2 other = square(1.0, 0.2).make();
  EXPECT_THROW(fast_march(rasterize(unit_ball(0.3), g), constant_cost(other, 1.0)), std::invalid_argument);
}

TEST(ClosedFormField, RadialValuesMatchQuadrature) {
  const auto spec = disk(RegionKind::ball, -1.0, 1.0);
  const Grid2 g = square(2.2, 0.1).make();
  const auto f = closed_form_field(spec, g);
  for (int i = 0; i < g.nx; i += 3) {
    const Vec2 c = g.center(i, g.ny / 2);
    const double r = norm(c);
    const double w = f.w.at(i, g.ny / 2);
    if (r <= 1.0) {
      EXPECT_EQ(w, 0.0);
    } else if (r < 1.99) {
      EXPECT_NEAR(w, radial_w(1.0, r, 1.0, 1.0, 1.0), 1e-6) << r;
    } else if (r > 2.0) {
      EXPECT_TRUE(is_unreached(w));
    }
  }
}

TEST(ClosedFormField, EpsRaisesTheSpeed) {
  const auto spec = one_interface(0.0, 1.0);
  const Grid2 g = strip(-0.1, 1.1, 0.01).make();
  const auto a = closed_form_field(spec, g, 0.0);
  const auto b = closed_form_field(spec, g, 0.1);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_LE(b.w.values[k], a.w.values[k]);
}

TEST(TimeProjection, CapsValuesAndMarksCostBeyondTheCap) {
  const Grid2 g = strip(0.0, 1.0, 0.1, 2).make();
  ScalarField2 w(g, 0.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) w.at(i, j) = i * 0.1;
  const auto p = t_projection(w, constant_cost(g, 1.0), 0.45, 2.0);
  EXPECT_DOUBLE_EQ(p.w.at(9, 0), 0.45);
  EXPECT_DOUBLE_EQ(p.w.at(3, 1), 0.3);
  EXPECT_DOUBLE_EQ(p.cost.L.at(9, 0), -0.5);
  EXPECT_DOUBLE_EQ(p.cost.L.at(4, 0), 1.0);
}

TEST(Characteristic, DescendsToTheInitialSet) {
  const Grid2 g = square(1.0, 0.01).make();
  const auto mask = rasterize(unit_ball(0.3), g);
  const auto w = fast_march(mask, constant_cost(g, 1.0));
  const auto path = trace_characteristic(w, mask, {0.6, 0.4});
  ASSERT_TRUE(path.reached_mask);
  const double dist = std::hypot(0.6, 0.4) - 0.3;
  EXPECT_NEAR(path.theta, dist, 0.02);
  for (std::size_t k = 1; k < path.cost_to_go.size(); ++k)
    EXPECT_LE(path.cost_to_go[k], path.cost_to_go[k - 1] + 1e-9);
}
