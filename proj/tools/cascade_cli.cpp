#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cascade/cascade1d.hpp"
#include "cascade/closedform.hpp"
#include "cascade/eikonal.hpp"
#include "cascade/fronttrack.hpp"
#include "cascade/scenario_io.hpp"
#include "cascade/verify.hpp"

namespace fs = std::filesystem;
using namespace cascade;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_h;
};

ScenarioSpec load(const Common& c) {
  ScenarioSpec s = load_scenario(c.scenario);
  if (c.seed) s.seed = *c.seed;
  return s;
}

GridSpec grid_for(const ScenarioSpec& s, const Common& c, double fallback_h) {
  GridSpec g = s.grid ? *s.grid : default_grid(s, c.grid_h.value_or(fallback_h));
  if (c.grid_h) g.h = *c.grid_h;
  return g;
}

std::string dump(const Json& j) { return canonical_json(j); }

void write_field_csv(std::ostream& os, const ScalarField2& w) {
  os << "x,y,w\n";
  os.precision(17);
  const Grid2& g = w.grid;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec2 c = g.center(k);
    os << c.x << ',' << c.y << ',';
    if (is_unreached(w.values[k])) os << "inf";
    else os << w.values[k];
    os << '\n';
  }
}

void write_field_outputs(const fs::path& dir, const ArrivalField& f) {
  write_atomic(dir / "w.csv", [&](std::ostream& os) { write_field_csv(os, f.w); });
  const double top = f.max_finite();
  write_atomic(dir / "w.pgm", [&](std::ostream& os) { write_pgm(os, f.w, top > 0.0 ? top : 1.0); });
}

Json ledger_json(const EnergyLedger& l) {
  Json series = Json::array();
  for (const auto& e : l.series)
    series.push_back({{"t", e.t},
                      {"boundary", e.boundary},
                      {"volumetric", e.volumetric},
                      {"locked", e.locked},
                      {"outflow", e.outflow},
                      {"excess", e.excess(l.b0)},
                      {"alive", e.alive}});
  return {{"b0", l.b0},
          {"first_event", number_or_string(l.first_event)},
          {"first_arrest", number_or_string(l.first_arrest)},
          {"series", series}};
}

VerificationReport field_report(const ScenarioSpec& spec, const GridSpec& gs, const ArrivalField& f, double eps) {
  VerificationReport rep;
  rep.digest = scenario_digest(spec);
  rep.grid = gs;
  rep.seed = spec.seed;
  rep.checks.push_back(check_perimeter_bound(f, spec, eps, spec.tolerances.perimeter));
  rep.checks.push_back(check_tv_bound(f, spec, eps, spec.tolerances.tv));
  return rep;
}

int cmd_jump_size(const Common& c) {
  const ScenarioSpec s = load(c);
  if (s.initial.kind != RegionKind::half_line) throw UsageError("jump-size needs a 1D half_line scenario");
  const auto j = jump_size_1d(s.u.axis_profile().shifted(s.initial.left));
  Json out = {{"jump", number_or_string(j.value)}};
  if (j.horizon_limited) out["horizon_limited"] = true;
  std::cout << out.dump() << '\n';
  if (!c.out.empty()) write_atomic(c.out, dump(out));
  return 0;
}

int cmd_solve(const Common& c, const std::string& solver) {
  const ScenarioSpec s = load(c);
  if (c.out.empty()) throw UsageError("solve needs --out <dir>");
  const fs::path dir = c.out;
  fs::create_directories(dir);
  const double eps = s.eps();
  const GridSpec gs = grid_for(s, c, 5e-3);
  const Grid2 g = gs.make();
  Json summary = {{"solver", solver}, {"scenario_digest", scenario_digest(s)}};
  Json ledger;
  VerificationReport rep;
  const Family fam = family_of(s);

  if (solver == "closedform") {
    ArrivalField f;
    try {
      f = closed_form_field(s, g, 0.0);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("closedform: ") + e.what());
    }
    switch (fam) {
      case Family::one_interface: {
        const auto sol = solve_one_interface(s);
        summary["x_star"] = number_or_string(s.initial.left + sol.x_star);
        break;
      }
      case Family::two_interface: {
        const auto sol = solve_two_interface(s);
        summary["x0_star"] = number_or_string(sol.x0_star);
        summary["x1_star"] = number_or_string(sol.x1_star);
        summary["t_star"] = number_or_string(sol.t_star);
        if (sol.locked_energy) summary["locked_energy"] = *sol.locked_energy;
        break;
      }
      case Family::radial_growing:
      case Family::radial_shrinking: {
        const auto sol = solve_radial(s);
        summary["r_star"] = number_or_string(sol.r_star);
        if (sol.locked_energy) summary["locked_energy"] = *sol.locked_energy;
        if (sol.r_star == 0.0) summary["t_vanish"] = number_or_string(sol.w(0.0));
        break;
      }
      case Family::none: throw UsageError("closedform: scenario is not one of the symmetric families");
    }
    write_field_outputs(dir, f);
    ledger = summary;
    rep = field_report(s, gs, f, 0.0);
  } else if (solver == "ode1d") {
    if (fam != Family::one_interface && fam != Family::two_interface)
      throw UsageError("ode1d needs a 1D scenario (half_line or interval_complement)");
    ArrivalField f;
    f.w = ScalarField2(g, kUnreached);
    const Profile1D& u = s.u.axis_profile();
    if (fam == Family::one_interface) {
      const double a = s.initial.left;
      const auto p = solve_arrival_ode(u.shifted(a), s.v0(Vec2{a, 0.0}));
      for (std::size_t k = 0; k < g.size(); ++k) f.w.values[k] = p.w(g.center(k).x - a);
      summary["x_star"] = number_or_string(a + p.x_star);
    } else {
      const double a = s.initial.left;
      const double b = s.initial.right;
      const auto l = solve_arrival_ode(u.shifted(a), s.v0(Vec2{a, 0.0}));
      const auto r = solve_arrival_ode(u.mirrored(0.5 * b), s.v0(Vec2{b, 0.0}));
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = g.center(k).x;
        f.w.values[k] = x <= a || x >= b ? 0.0 : std::min(l.w(x - a), r.w(b - x));
      }
    }
    write_field_outputs(dir, f);
    ledger = summary;
    rep = field_report(s, gs, f, 0.0);
  } else if (solver == "fronttrack") {
    const FrontRun run = run_front(s, g, eps);
    write_field_outputs(dir, run.field);
    ledger = ledger_json(run.ledger);
    summary["t_end"] = run.t_end;
    summary["locked"] = run.locked;
    summary["outflow"] = run.outflow;
    summary["steps"] = run.steps;
    summary["final_excess"] = run.ledger.series.back().excess(run.ledger.b0);
    rep = field_report(s, gs, run.field, eps);
    rep.checks.push_back(check_energy_balance(run, s.tolerances.energy));
    rep.checks.push_back(check_admissibility(run, s.tolerances.energy));
  } else if (solver == "eikonal") {
    if (!s.cost) throw UsageError("eikonal needs a cost source (\"cost\" in the scenario)");
    CostField cost;
    if (s.cost->kind == CostSpec::Kind::constant) {
      cost = constant_cost(g, s.cost->value);
    } else {
      try {
        cost = closed_form_cost(s, g, eps);
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("eikonal: ") + e.what());
      }
    }
    ArrivalField f;
    f.w = fast_march(rasterize(s.initial, g), cost);
    f.cap = s.cap.value_or(kUnreached);
    write_field_outputs(dir, f);
    summary["max_w"] = f.max_finite();
    ledger = summary;
    rep = field_report(s, gs, f, eps);
  } else {
    throw UsageError("unknown solver '" + solver + "'");
  }
  write_atomic(dir / "ledger.json", dump(ledger));
  write_atomic(dir / "report.json", dump(report_to_json(rep)));
  write_atomic(dir / "summary.json", dump(summary));
  std::cout << summary.dump() << '\n';
  return rep.passed() ? 0 : 1;
}

int cmd_verify(const Common& c) {
  const ScenarioSpec s = load(c);
  VerifyOptions opt;
  opt.grid_h = c.grid_h;
  opt.seed = c.seed;
  const auto rep = verify_scenario(s, opt);
  const std::string text = dump(report_to_json(rep));
  if (c.out.empty()) std::cout << text;
  else write_atomic(c.out, text);
  for (const auto& ch : rep.checks)
    std::cerr << to_string(ch.status) << ' ' << ch.name << " measured=" << ch.measured << " bound=" << ch.bound
              << '\n';
  return rep.passed() ? 0 : 1;
}

int cmd_sweep(const Common& c, const std::string& solver) {
  const ScenarioSpec s = load(c);
  if (c.out.empty()) throw UsageError("sweep needs --out <dir>");
  const fs::path dir = c.out;
  fs::create_directories(dir);
  Json rows = Json::array();
  std::string csv = "eps,quantity,value\n";
  auto add = [&](double eps, const std::string& what, double v) {
    rows.push_back({{"eps", eps}, {"quantity", what}, {"value", number_or_string(v)}});
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g\n", eps, what.c_str(), v);
    csv += buf;
  };
  if (solver == "ode1d") {
    if (s.initial.kind != RegionKind::half_line) throw UsageError("ode1d sweep needs a half_line scenario");
    const Profile1D ub = s.u.axis_profile().shifted(s.initial.left);
    FastOdeOptions o;
    o.v0 = 0.0;
    const auto ex = extrapolate_fast_ode(ub, 0.0, s.eps_ladder, 1e6, o);
    for (std::size_t k = 0; k < ex.eps.size(); ++k) add(ex.eps[k], "fast_ode_limit", ex.limits[k]);
    add(0.0, "extrapolated_jump", ex.extrapolated);
  } else if (solver == "fronttrack") {
    const Grid2 g = grid_for(s, c, 5e-3).make();
    for (double eps : s.eps_ladder) {
      const FrontRun run = run_front(s, g, eps);
      add(eps, "final_excess", run.ledger.series.back().excess(run.ledger.b0));
      add(eps, "locked", run.locked);
      add(eps, "t_end", run.t_end);
      add(eps, "set_area", run.field.sublevel(kUnreached).area());
    }
  } else {
    throw UsageError("sweep supports --solver ode1d or fronttrack");
  }
  write_atomic(dir / "sweep.csv", csv);
  write_atomic(dir / "sweep.json", dump({{"scenario_digest", scenario_digest(s)}, {"rows", rows}}));
  std::cout << rows.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cascade: arrival-time solvers for supercooled jump cascades"};
  app.require_subcommand(1);
  Common common;
  std::string solver = "fronttrack";
  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--scenario", common.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", common.out, "output directory or file");
    if (needs_out) out->required();
    sub->add_option("--seed", common.seed, "override the scenario seed");
    sub->add_option("--grid-h", common.grid_h, "override the lattice spacing")->check(CLI::PositiveNumber);
  };
  auto* jump = app.add_subcommand("jump-size", "jump size of a 1D scenario");
  add_common(jump, false);
  auto* solve = app.add_subcommand("solve", "run one solver and write w.csv, w.pgm, ledger.json, report.json");
  add_common(solve, true);
  solve->add_option("--solver", solver, "closedform | ode1d | fronttrack | eikonal")
      ->check(CLI::IsMember({"closedform", "ode1d", "fronttrack", "eikonal"}));
  auto* verify = app.add_subcommand("verify", "run the check battery; nonzero exit on failure");
  add_common(verify, false);
  auto* sweep = app.add_subcommand("sweep", "run over the scenario eps ladder");
  add_common(sweep, true);
  sweep->add_option("--solver", solver, "ode1d | fronttrack")->check(CLI::IsMember({"ode1d", "fronttrack"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (*jump) return cmd_jump_size(common);
    if (*solve) return cmd_solve(common, solver);
    if (*verify) return cmd_verify(common);
    if (*sweep) return cmd_sweep(common, solver);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
