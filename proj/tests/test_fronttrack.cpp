#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cascade/fronttrack.hpp"
#include "support.hpp"

using namespace cascade;
using namespace testing_support;

namespace {

double excess_fraction(const FrontRun& run) {
  const auto& last = run.ledger.series.back();
  return last.excess(run.ledger.b0) / run.ledger.b0;
}

double mid_row(const FrontRun& run, double x) {
  const Grid2& g = run.field.grid();
  return sample(run.field.w, {x, g.origin.y + 0.5 * g.height()});
}

}  // namespace

TEST(FrontTrack, OneInterfaceFollowsTheLogProfile) {
  const auto spec = one_interface(0.0, 1.0);
  const auto run = run_front(spec, strip(-0.05, 1.2, 5e-3).make(), 1e-3);
  EXPECT_TRUE(run.all_stopped);
  for (double x : {0.25, 0.5, 0.75}) EXPECT_NEAR(mid_row(run, x), one_interface_w(x, 1.001, 1.0), 0.02 * one_interface_w(x, 1.0, 1.0));
  EXPECT_TRUE(is_unreached(mid_row(run, 1.1)));
}

TEST(FrontTrack, InitialCellsStayAtZero) {
  const auto spec = one_interface(-0.5, 0.5);
  const Grid2 g = strip(-0.05, 1.2, 1e-2).make();
  const auto run = run_front(spec, g, 1e-3);
  const auto mask = rasterize(spec.initial, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (mask.inside[k]) EXPECT_EQ(run.field.w.values[k], 0.0);
    else EXPECT_GE(run.field.w.values[k], 0.0);
  }
}

TEST(FrontTrack, ArrivalTimeIncreasesAwayFromTheSolid) {
  const auto run = run_front(one_interface(0.0, 1.0), strip(-0.05, 1.2, 1e-2).make(), 1e-3);
  double prev = 0.0;
  for (double x = 0.02; x < 0.9; x += 0.02) {
    const double w = mid_row(run, x);
    EXPECT_GE(w, prev - 1e-9) << x;
    prev = w;
  }
}

TEST(FrontTrack, LedgerBalancesThroughArrest) {
  const auto run = run_front(one_interface(0.0, 1.0), strip(-0.05, 1.2, 1e-2).make(), 1e-3);
  const auto& last = run.ledger.series.back();
  const double e = last.excess(run.ledger.b0);
  EXPECT_NEAR((e - last.locked - last.outflow) / run.ledger.b0, 0.0, 0.02);
  EXPECT_LE(run.ledger.first_arrest, run.t_end);
  for (const auto& entry : run.ledger.series) EXPECT_GE(entry.excess(run.ledger.b0) / run.ledger.b0, -0.02);
}

TEST(FrontTrack, TwoInterfaceLocksTheClosedFormEnergy) {
  const auto run = run_front(two_interface(0.0, 0.6), strip(-0.05, 1.05, 5e-3).make(), 1e-3);
  const double width = 20 * 5e-3;
  const double per_width = run.ledger.series.back().excess(run.ledger.b0) / width;
  EXPECT_NEAR(per_width, 2.2, 0.02 * 2.2);
  EXPECT_NEAR(run.ledger.first_event, one_interface_w(0.5, 0.6, 1.0), 0.02 * 1.8);
}

TEST(FrontTrack, NoLockInWhenFrontsStopApart) {
  const auto run = run_front(two_interface(0.0, 0.3), strip(-0.05, 1.05, 1e-2).make(), 1e-3);
  EXPECT_TRUE(is_unreached(run.ledger.first_event));
  EXPECT_NEAR(excess_fraction(run), run.locked / run.ledger.b0, 0.02);
  EXPECT_TRUE(is_unreached(mid_row(run, 0.5)));
}

TEST(FrontTrack, CapStopsTheRun) {
  ScenarioSpec spec = one_interface(-1.0, 1.0);
  spec.cap = 0.3;
  const auto run = run_front(spec, strip(-0.05, 1.0, 1e-2).make(), 1e-3);
  EXPECT_NEAR(run.t_end, 0.3, 1e-12);
  EXPECT_NEAR(mid_row(run, 0.2), 0.2 / 1.001, 0.01);
  EXPECT_TRUE(is_unreached(mid_row(run, 0.5)));
}

TEST(FrontTrack, ShrinkingDiskVanishesOnTime) {
  const auto run = run_front(disk(RegionKind::ball_complement, -1.0, 1.0), square(1.1, 1e-2).make(), 1e-3);
  const double t_vanish = 2.0 * std::log(2.0) - 1.0;
  EXPECT_NEAR(run.field.max_finite(), t_vanish, 0.02 * t_vanish);
  EXPECT_NEAR(excess_fraction(run) * run.ledger.b0 / (2.0 * std::numbers::pi), 2.0, 0.02 * 2.0);
}

TEST(FrontTrack, RunsAreDeterministic) {
  const auto spec = two_interface(-0.2, 0.4);
  const Grid2 g = strip(-0.05, 1.05, 1e-2).make();
  const auto a = run_front(spec, g, 1e-3);
  const auto b = run_front(spec, g, 1e-3);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(a.field.w.values, b.field.w.values);
}

TEST(FrontTrack, RejectsNegativeEps) {
  EXPECT_THROW(initialize_front(one_interface(0.0, 1.0), strip(-0.05, 1.0, 1e-2).make(), -1.0), std::invalid_argument);
}
