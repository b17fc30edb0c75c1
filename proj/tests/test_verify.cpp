#include <gtest/gtest.h>

#include <cmath>

#include "cascade/verify.hpp"
#include "support.hpp"

using namespace cascade;
using namespace testing_support;

namespace {

const Check* find(const VerificationReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST(DefaultGrid, StripAroundTheOneInterfaceExtent) {
  const auto gs = default_grid(one_interface(0.0, 1.0), 1e-2);
  EXPECT_TRUE(gs.periodic_y);
  EXPECT_NEAR(gs.xmin, -0.5, 1e-12);
  EXPECT_NEAR(gs.xmax, 1.501, 1e-9);
  EXPECT_NEAR(gs.ymax - gs.ymin, 0.2, 1e-12);
}

TEST(DefaultGrid, SquareContainsTheGrowingDisk) {
  const auto gs = default_grid(disk(RegionKind::ball, -1.0, 1.0), 1e-2);
  EXPECT_FALSE(gs.periodic_y);
  EXPECT_GT(gs.xmax, 2.0);
  EXPECT_LT(gs.xmin, -2.0);
}

TEST(PerimeterBound, HoldsForTheFrontTrackedField) {
  const auto spec = one_interface(0.0, 1.0);
  const auto run = run_front(spec, default_grid(spec, 1e-2).make(), 1e-3);
  std::vector<PerimeterSample> samples;
  const auto c = check_perimeter_bound(run.field, spec, 1e-3, 0.02, &samples);
  EXPECT_EQ(c.status, Status::pass) << c.measured;
  ASSERT_EQ(samples.size(), 11u);
  // At t = inf the bound is tight: gamma W against (gamma + V0 + eps - x*) W.
  EXPECT_NEAR(samples.back().lhs, samples.back().rhs, 0.03 * samples.back().lhs);
}

TEST(PerimeterBound, DetectsAFieldThatSweepsTooFar) {
  const auto spec = one_interface(0.0, 1.0);
  const auto run = run_front(spec, default_grid(spec, 1e-2).make(), 1e-3);
  ScenarioSpec weaker = spec;
  weaker.v0.value = 0.3;
  EXPECT_EQ(check_perimeter_bound(run.field, weaker, 1e-3, 0.02).status, Status::fail);
}

TEST(PerimeterBound, SkipsWhenTheSetReachesTheBox) {
  const auto spec = one_interface(-1.0, 1.0);
  const auto run = run_front(spec, strip(-0.1, 0.5, 1e-2).make(), 1e-3);
  EXPECT_EQ(check_perimeter_bound(run.field, spec, 1e-3, 0.02).status, Status::skip);
}

TEST(TvBound, HoldsAndFailsUnderOscillation) {
  const auto spec = one_interface(0.0, 1.0);
  const auto run = run_front(spec, default_grid(spec, 1e-2).make(), 1e-3);
  EXPECT_EQ(check_tv_bound(run.field, spec, 1e-3, 0.05).status, Status::pass);
  ArrivalField noisy = run.field;
  const double top = noisy.max_finite();
  for (std::size_t k = 0; k < noisy.w.values.size(); ++k)
    if (std::isfinite(noisy.w.values[k]) && noisy.w.values[k] > 0.0) noisy.w.values[k] = (k % 2) ? top : 0.01 * top;
  EXPECT_EQ(check_tv_bound(noisy, spec, 1e-3, 0.05).status, Status::fail);
}

TEST(TvBound, CapLimitsTheTimeHorizon) {
  const auto spec = one_interface(0.0, 1.0);
  const auto run = run_front(spec, default_grid(spec, 1e-2).make(), 1e-3);
  const auto c = check_tv_bound(run.field, spec, 1e-3, 0.05, 0.2);
  EXPECT_EQ(c.status, Status::pass);
  EXPECT_NEAR(c.measured, total_variation(run.field.capped(0.2)), 1e-12);
  // Bound with kappa = (gamma + V0 + eps) W and no (1+u)^- part.
  EXPECT_NEAR(c.bound, 0.2 * 2.0 * 2.001 * 0.2, 1e-9);
}

TEST(EnergyChecks, PassOnARealRunAndFailOnATamperedLedger) {
  const auto spec = two_interface(0.0, 0.6);
  auto run = run_front(spec, default_grid(spec, 1e-2).make(), 1e-3);
  EXPECT_EQ(check_energy_balance(run, 0.02).status, Status::pass);
  EXPECT_EQ(check_admissibility(run, 0.02).status, Status::pass);
  auto broken = run;
  broken.ledger.series.back().locked *= 0.5;
  EXPECT_EQ(check_energy_balance(broken, 0.02).status, Status::fail);
  for (auto& e : run.ledger.series) e.boundary *= 0.9;
  EXPECT_EQ(check_admissibility(run, 0.02).status, Status::fail);
}

TEST(Oracle, SkipsOutsideTheSymmetricFamilies) {
  ScenarioSpec s = disk(RegionKind::annulus_complement, 0.0, 0.5);
  EXPECT_EQ(family_of(s), Family::none);
  const auto checks = oracle_equivalence(s, square(2.0, 0.1));
  ASSERT_EQ(checks.size(), 1u);
  EXPECT_EQ(checks[0].status, Status::skip);
}

TEST(Oracle, FamiliesAreRecognised) {
  EXPECT_EQ(family_of(one_interface(0.0, 1.0)), Family::one_interface);
  EXPECT_EQ(family_of(two_interface(0.0, 1.0)), Family::two_interface);
  EXPECT_EQ(family_of(disk(RegionKind::ball, -1.0, 1.0)), Family::radial_growing);
  EXPECT_EQ(family_of(disk(RegionKind::ball_complement, -1.0, 1.0)), Family::radial_shrinking);
  ScenarioSpec sides = disk(RegionKind::ball, -1.0, 1.0);
  sides.v0.kind = V0Kind::sides;
  EXPECT_EQ(family_of(sides), Family::none);
}

TEST(Oracle, TwoInterfaceSolversAgree) {
  const auto spec = two_interface(0.0, 0.6);
  const auto checks = oracle_equivalence(spec, default_grid(spec, 2e-3));
  for (const auto& c : checks) EXPECT_NE(c.status, Status::fail) << c.name << " " << c.measured;
  bool locked = false;
  for (const auto& c : checks) locked |= c.name == "oracle.locked_energy";
  EXPECT_TRUE(locked);
}

TEST(VerifyScenario, OneInterfacePassesAtModerateResolution) {
  ScenarioSpec spec = one_interface(0.0, 1.0);
  spec.paths = 4000;
  VerifyOptions o;
  o.grid_h = 2e-3;
  const auto rep = verify_scenario(spec, o);
  for (const auto& c : rep.checks) EXPECT_NE(c.status, Status::fail) << c.name << " " << c.measured;
  EXPECT_TRUE(rep.passed());
  ASSERT_NE(find(rep, "equilibrium.fixed_point"), nullptr);
  EXPECT_EQ(find(rep, "equilibrium.fixed_point")->status, Status::pass);
}

TEST(VerifyScenario, ZeroToleranceFails) {
  ScenarioSpec spec = two_interface(0.0, 0.6);
  spec.tolerances.energy = 0.0;
  spec.tolerances.front_oracle = 0.0;
  VerifyOptions o;
  o.grid_h = 1e-2;
  EXPECT_FALSE(verify_scenario(spec, o).passed());
}

TEST(VerifyScenario, FewPathsSkipTheEquilibriumCheck) {
  ScenarioSpec spec = disk(RegionKind::ball, -1.0, 1.0);
  spec.paths = 100;
  VerifyOptions o;
  o.grid_h = 2e-2;
  o.oracle = false;
  const auto rep = verify_scenario(spec, o);
  ASSERT_NE(find(rep, "equilibrium.fixed_point"), nullptr);
  EXPECT_EQ(find(rep, "equilibrium.fixed_point")->status, Status::skip);
}

TEST(Report, JsonCarriesStatusesAndEncodesInfinity) {
  VerificationReport r;
  r.checks.push_back(decide("a", "p", kUnreached, 1.0, 0.1, false));
  r.checks.push_back(skipped("b", "p", "why"));
  r.seed = 9;
  const auto j = report_to_json(r);
  EXPECT_EQ(j["checks"][0]["measured"], "inf");
  EXPECT_EQ(j["checks"][0]["status"], "fail");
  EXPECT_EQ(j["checks"][1]["status"], "skip");
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_EQ(j["seed"], 9);
}
