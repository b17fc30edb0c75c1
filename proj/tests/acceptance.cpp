#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "cascade/verify.hpp"
#include "support.hpp"

using namespace cascade;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const char* fmt, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    if (!detail.empty()) detail += "; ";
    detail += buf;
    if (!ok) {
      pass = false;
      detail += " [FAIL]";
    }
  }
};

double mid_row(const ArrivalField& f, double x) {
  const Grid2& g = f.grid();
  return sample(f.w, {x, g.origin.y + 0.5 * g.height()});
}

double swept_radius(const ArrivalField& f) {
  const Grid2& g = f.grid();
  const auto phi = f.sublevel_level(kUnreached);
  double area = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) area += std::clamp(0.5 - phi[k] / g.h, 0.0, 1.0);
  return std::sqrt(area * g.h * g.h / std::numbers::pi);
}

LatticeMask disks_mask(const std::vector<std::pair<Vec2, double>>& disks, double h, double half) {
  LatticeMask m;
  m.origin = {-half, -half};
  m.h = h;
  m.nx = m.ny = static_cast<int>(std::lround(2 * half / h));
  m.cells.assign(static_cast<std::size_t>(m.nx) * m.ny, 0);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      const Vec2 c{m.origin.x + (i + 0.5) * h, m.origin.y + (j + 0.5) * h};
      for (const auto& [p, r] : disks)
        if (norm(c - p) <= r) m.cells[static_cast<std::size_t>(j) * m.nx + i] = 1;
    }
  return m;
}

struct SuiteCase {
  std::string name;
  ScenarioSpec spec;
  GridSpec grid;
};

std::vector<SuiteCase> geometry_suite() {
  std::vector<SuiteCase> out;
  {
    ScenarioSpec s = disk(RegionKind::ball, -1.0, 1.0);
    out.push_back({"disk", s, default_grid(s, 5e-3)});
  }
  {
    ScenarioSpec s = disk(RegionKind::lattice_mask, -0.9, 0.6, 1.0, 0.3);
    s.initial.lattice = disks_mask({{{-0.35, 0.0}, 0.25}, {{0.35, 0.0}, 0.25}}, 5e-3, 0.7);
    out.push_back({"two_disks", s, {-1.6, 1.6, -1.2, 1.2, 5e-3, false}});
  }
  {
    ScenarioSpec s = disk(RegionKind::annulus_complement, -0.5, 0.5, 0.5);
    s.initial.outer = 1.0;
    out.push_back({"annulus_complement", s, default_grid(s, 5e-3)});
  }
  {
    ScenarioSpec s = two_interface(-0.3, 0.3);
    out.push_back({"strip", s, default_grid(s, 2e-3)});
  }
  {
    // Plus-shaped blob with a notch.
    ScenarioSpec s = disk(RegionKind::lattice_mask, -0.7, 0.4, 1.0, 0.5);
    LatticeMask m;
    m.origin = {-0.5, -0.5};
    m.h = 0.1;
    m.nx = m.ny = 10;
    m.cells.assign(100, 0);
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i < 10; ++i) {
        const bool plus = (i >= 3 && i <= 6) || (j >= 3 && j <= 6);
        const bool notch = i >= 5 && i <= 6 && j >= 7;
        const bool corner = i <= 1 && j <= 1;
        m.cells[static_cast<std::size_t>(j) * 10 + i] = (plus && !notch) || corner;
      }
    s.initial.lattice = m;
    out.push_back({"lattice_blob", s, {-1.4, 1.4, -1.4, 1.4, 5e-3, false}});
  }
  return out;
}

// Runs shared between criteria so a full pass computes each once.
struct Cache {
  std::map<std::string, FrontRun> runs;
  std::map<std::string, EquilibriumState> states;

  const FrontRun& run(const std::string& key, const ScenarioSpec& s, const GridSpec& gs, double eps = 1e-3) {
    auto it = runs.find(key);
    if (it == runs.end()) it = runs.emplace(key, run_front(s, gs.make(), eps)).first;
    return it->second;
  }

  const EquilibriumState& state(const std::string& key, const ScenarioSpec& s, const GridSpec& gs, int paths) {
    auto it = states.find(key);
    if (it == states.end()) {
      const Grid2 g = gs.make();
      const double eps = 1e-3;
      EquilibriumOptions o;
      o.paths = paths;
      o.seed = 1;
      o.cost = closed_form_cost(s, g, eps);
      it = states.emplace(key, build_from_solution(closed_form_field(s, g, eps), s, eps, o)).first;
    }
    return it->second;
  }
};

const ScenarioSpec kOne = one_interface(0.0, 1.0);
const ScenarioSpec kGrow = disk(RegionKind::ball, -1.0, 1.0);
const ScenarioSpec kShrink = disk(RegionKind::ball_complement, -1.0, 1.0);
const ScenarioSpec kTwo = two_interface(0.0, 0.6);

GridSpec one_grid(double h) { return default_grid(kOne, h); }
GridSpec wedge_grid(double h) { return {0.98, 1.4, 0.0, 0.05, h, false}; }

Outcome ac1(Cache& c) {
  Outcome o;
  const auto sol = solve_one_interface(kOne);
  o.require(std::abs(sol.x_star - 1.0) <= 1e-9, "x*=%.12g (tol %.0e)", sol.x_star, 1e-9);
  o.require(std::abs(sol.w(0.5) - std::log(2.0)) <= 1e-8, "closedform w(0.5)=%.12g (tol %.0e)", sol.w(0.5), 1e-8);
  const auto ode = solve_arrival_ode(Profile1D(0.0), 1.0);
  o.require(std::abs(ode.w(0.5) - std::log(2.0)) <= 1e-8, "ode w(0.5)=%.12g (tol %.0e)", ode.w(0.5), 1e-8);
  const auto& run = c.run("one", kOne, one_grid(1e-3));
  const double wf = mid_row(run.field, 0.5);
  o.require(std::abs(wf - std::log(2.0)) <= 2e-3, "fronttrack w(0.5)=%.6g (tol %.0e)", wf, 2e-3);
  return o;
}

Outcome ac2(Cache&) {
  Outcome o;
  const Profile1D u({0.3}, {-2.0, 0.0});
  const double j = jump_size_1d(u).value;
  o.require(std::abs(j - 0.6) <= 1e-8, "bisection jump=%.12g (tol %.0e)", j, 1e-8);
  const auto ex = extrapolate_fast_ode(u, 0.0, {4e-3, 2e-3, 1e-3}, 1e6);
  o.require(std::abs(ex.extrapolated - 0.6) <= 1e-3, "fast ODE jump=%.9g (tol %.0e)", ex.extrapolated, 1e-3);
  return o;
}

Outcome ac3(Cache& c) {
  Outcome o;
  const auto sol = solve_radial(kGrow);
  const double w15 = 2.0 * std::log(2.0) - 0.5;
  o.require(std::abs(sol.r_star - 2.0) <= 1e-9, "closedform R*=%.12g (tol %.0e)", sol.r_star, 1e-9);
  o.require(std::abs(sol.w(1.5) - w15) <= 1e-8, "closedform w(1.5)=%.12g (tol %.0e)", sol.w(1.5), 1e-8);
  const auto& run = c.run("grow", kGrow, default_grid(kGrow, 5e-3));
  const double r = swept_radius(run.field);
  o.require(std::abs(r - 2.0) <= 0.02, "fronttrack R*=%.6g (tol %.2g)", r, 0.02);
  double worst = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double a = 2.0 * std::numbers::pi * (k + 0.37) / 16.0;
    const double w = sample(run.field.w, {1.5 * std::cos(a), 1.5 * std::sin(a)});
    worst = std::max(worst, std::abs(w - w15) / w15);
  }
  o.require(worst <= 0.02, "fronttrack w(1.5) worst rel err=%.3g (tol %.2g)", worst, 0.02);
  return o;
}

Outcome ac4(Cache& c) {
  Outcome o;
  const auto sol = solve_two_interface(kTwo);
  const double e = sol.locked_energy.value_or(kUnreached);
  o.require(std::abs(e - 2.2) <= 1e-8, "closedform locked=%.12g (tol %.0e)", e, 1e-8);
  const GridSpec gs = default_grid(kTwo, 1e-3);
  const auto& run = c.run("two", kTwo, gs);
  const double per_width = run.ledger.series.back().excess(run.ledger.b0) / (gs.ymax - gs.ymin);
  o.require(std::abs(per_width - 2.2) <= 0.02 * 2.2, "ledger E per width=%.6g (tol %.2g rel)", per_width, 0.02);
  return o;
}

Outcome ac5(Cache& c) {
  Outcome o;
  const double t_exact = 2.0 * std::log(2.0) - 1.0;
  const auto sol = solve_radial(kShrink);
  o.require(std::abs(sol.w(0.0) - t_exact) <= 1e-8, "quadrature t_vanish=%.12g (tol %.0e)", sol.w(0.0), 1e-8);
  const double oracle = simpson([](double r) { return r / (2.0 - r); }, 0.0, 1.0);
  o.require(std::abs(oracle - t_exact) <= 1e-8, "simpson t_vanish=%.12g (tol %.0e)", oracle, 1e-8);
  const auto& run = c.run("shrink", kShrink, default_grid(kShrink, 5e-3));
  const double t = run.field.max_finite();
  o.require(std::abs(t - t_exact) <= 0.02 * t_exact, "fronttrack t_vanish=%.6g (tol %.2g rel)", t, 0.02);
  const double locked = run.ledger.series.back().excess(run.ledger.b0) / (2.0 * std::numbers::pi);
  o.require(std::abs(locked - 2.0) <= 0.04, "locked energy per 2 pi R0=%.6g (tol %.2g)", locked, 0.04);
  return o;
}

Outcome ac6(Cache& c) {
  Outcome o;
  for (const auto& sc : geometry_suite()) {
    const auto& run = c.run("suite." + sc.name, sc.spec, sc.grid);
    const auto chk = check_perimeter_bound(run.field, sc.spec, 1e-3, 0.02);
    const bool ok = chk.status == Status::pass;
    o.require(ok, (sc.name + " worst lhs/allowed=%.4g (max %.0f)").c_str(), chk.measured, 1.0);
    if (chk.status == Status::skip) o.detail += " skipped: " + chk.detail;
  }
  return o;
}

Outcome ac7(Cache& c) {
  Outcome o;
  for (const auto& sc : geometry_suite()) {
    const auto& run = c.run("suite." + sc.name, sc.spec, sc.grid);
    const auto chk = check_tv_bound(run.field, sc.spec, 1e-3, 0.05);
    o.require(chk.status == Status::pass, (sc.name + " TV=%.4g bound=%.4g").c_str(), chk.measured, chk.bound);
  }
  return o;
}

Outcome ac8(Cache& c) {
  Outcome o;
  const double r1 = fixed_point_residual(c.state("one.1e-3", kOne, one_grid(1e-3), 10000));
  const double r2 = fixed_point_residual(c.state("one.5e-4", kOne, one_grid(5e-4), 40000));
  o.require(r1 <= 5e-2, "one-interface h=1e-3 residual=%.3g (tol %.2g)", r1, 5e-2);
  o.require(r2 <= 2.5e-2, "one-interface h=5e-4 residual=%.3g (tol %.2g)", r2, 2.5e-2);
  const double q1 = fixed_point_residual(c.state("wedge.1e-3", kGrow, wedge_grid(1e-3), 10000));
  const double q2 = fixed_point_residual(c.state("wedge.5e-4", kGrow, wedge_grid(5e-4), 40000));
  o.require(q1 <= 5e-2, "radial h=1e-3 residual=%.3g (tol %.2g)", q1, 5e-2);
  o.require(q2 <= 2.5e-2, "radial h=5e-4 residual=%.3g (tol %.2g)", q2, 2.5e-2);
  o.require(q2 <= q1 || q2 <= 1e-6, "radial decay %.3g -> %.3g", q1, q2);
  return o;
}

Outcome ac9(Cache& c) {
  Outcome o;
  std::vector<std::pair<std::string, const FrontRun*>> runs{
      {"one", &c.run("one", kOne, one_grid(1e-3))},
      {"grow", &c.run("grow", kGrow, default_grid(kGrow, 5e-3))},
      {"shrink", &c.run("shrink", kShrink, default_grid(kShrink, 5e-3))},
  };
  for (const auto& sc : geometry_suite())
    if (sc.name != "strip" && sc.name != "disk") runs.emplace_back(sc.name, &c.run("suite." + sc.name, sc.spec, sc.grid));
  for (const auto& [name, run] : runs) {
    const double b0 = run->ledger.b0;
    const double window = std::min(run->ledger.first_event, run->ledger.first_arrest);
    double hi = 0.0;
    double lo = 0.0;
    for (const auto& e : run->ledger.series) {
      const double x = e.excess(b0) / b0;
      lo = std::min(lo, x);
      if (e.t < window) hi = std::max(hi, x);
    }
    o.require(hi <= 0.02 && lo >= -0.02, (name + " sup E before event=%.3g, inf E=%.3g").c_str(), hi, lo);
  }
  return o;
}

Outcome ac10(Cache& c) {
  Outcome o;
  const auto& st = c.state("one.1e-3", kOne, one_grid(1e-3), 10000);
  const auto bumps = random_bumps(st, 20, 2024);
  double worst = 0.0;
  for (const auto& b : bumps) worst = std::max(worst, pde_residual(st, b).relative());
  o.require(bumps.size() == 20, "bumps=%.0f (need %.0f)", static_cast<double>(bumps.size()), 20.0);
  o.require(worst <= 0.05, "worst relative residual=%.3g (tol %.2g)", worst, 0.05);
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome(Cache&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "one-interface log profile", 5.0, ac1},
      {2, "jump-size law", 1.0, ac2},
      {3, "radial growing disk", 60.0, ac3},
      {4, "two-interface lock-in", 60.0, ac4},
      {5, "shrinking disk vanishing time", 0.0, ac5},
      {6, "perimeter bound suite", 0.0, ac6},
      {7, "TV bound suite", 0.0, ac7},
      {8, "equilibrium fixed point", 120.0, ac8},
      {9, "admissibility and minimal excess", 0.0, ac9},
      {10, "distributional PDE residual", 0.0, ac10},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  Cache cache;
  int failures = 0;
  for (const auto& cr : all) {
    if (only && cr.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.run(cache);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.budget_s > 0.0 && secs > cr.budget_s) {
      out.pass = false;
      out.detail += "; runtime over budget";
    }
    failures += !out.pass;
    std::printf("AC-%02d %s  %-34s %7.2fs  %s\n", cr.id, out.pass ? "PASS" : "FAIL", cr.title, secs, out.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
