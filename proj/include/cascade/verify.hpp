#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cascade/cascade1d.hpp"
#include "cascade/closedform.hpp"
#include "cascade/eikonal.hpp"
#include "cascade/equilibrium.hpp"
#include "cascade/fronttrack.hpp"
#include "cascade/scenario_io.hpp"

namespace cascade {

enum class Status { pass, fail, skip };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skip: return "skip";
  }
  return "?";
}

struct Check {
  std::string name;
  std::string property;  // the statement being checked
  Status status = Status::skip;
  double measured = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

inline Check decide(std::string name, std::string property, double measured, double bound, double tolerance,
                    bool ok, std::string detail = {}) {
  return {std::move(name), std::move(property), ok ? Status::pass : Status::fail, measured, bound, tolerance,
          std::move(detail)};
}

inline Check skipped(std::string name, std::string property, std::string why) {
  Check c;
  c.name = std::move(name);
  c.property = std::move(property);
  c.detail = std::move(why);
  return c;
}

struct VerificationReport {
  std::vector<Check> checks;
  std::string digest;
  GridSpec grid;
  std::uint64_t seed = 0;

  bool passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.status == Status::fail; });
  }
};

inline Json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline Json report_to_json(const VerificationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"property", c.property},
                      {"status", to_string(c.status)},
                      {"measured", number_or_string(c.measured)},
                      {"bound", number_or_string(c.bound)},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  const GridSpec& g = r.grid;
  return {{"checks", checks},
          {"scenario_digest", r.digest},
          {"grid", {{"box", {g.xmin, g.xmax, g.ymin, g.ymax}}, {"h", g.h}, {"periodic_y", g.periodic_y}}},
          {"seed", r.seed},
          {"passed", r.passed()}};
}

//! Lattice box used when a scenario does not set one: a thin periodic strip
//! for the 1D kinds and a square around the final set for balls.
inline GridSpec default_grid(const ScenarioSpec& spec, double h) {
  const RegionSpec& r = spec.initial;
  switch (r.kind) {
    case RegionKind::half_line: {
      ScenarioSpec lifted = spec;
      lifted.v0.value = spec.v0.max_value() + spec.eps();
      lifted.v0.kind = V0Kind::constant;
      const auto sol = solve_one_interface(lifted);
      const double reach = std::isfinite(sol.x_star) ? sol.x_star : 1.0;
      return {r.left - 50 * h, r.left + reach + 50 * h, 0.0, 20 * h, h, true};
    }
    case RegionKind::interval_complement:
      return {r.left - 50 * h, r.right + 50 * h, 0.0, 20 * h, h, true};
    case RegionKind::ball: {
      ScenarioSpec lifted = spec;
      lifted.v0.value = spec.v0.max_value() + spec.eps();
      lifted.v0.kind = V0Kind::constant;
      const auto sol = solve_radial(lifted);
      const double reach = std::isfinite(sol.r_star) ? sol.r_star : 2.0 * r.radius;
      const double half = reach + 0.15 * r.radius + 20 * h;
      return {r.center.x - half, r.center.x + half, r.center.y - half, r.center.y + half, h, false};
    }
    case RegionKind::ball_complement: {
      const double half = r.radius + 0.2 * r.radius;
      return {r.center.x - half, r.center.x + half, r.center.y - half, r.center.y + half, h, false};
    }
    case RegionKind::annulus_complement: {
      const double half = r.outer + 0.2 * r.outer;
      return {r.center.x - half, r.center.x + half, r.center.y - half, r.center.y + half, h, false};
    }
    case RegionKind::lattice_mask: {
      const auto& m = r.lattice;
      const double pad = 0.5 * std::max(m.nx, m.ny) * m.h;
      return {m.origin.x - pad, m.origin.x + m.nx * m.h + pad, m.origin.y - pad, m.origin.y + m.ny * m.h + pad, h,
              false};
    }
  }
  return {};
}

namespace detail {

//! Fraction of each cell covered by the solid, from the signed distance when analytic.
inline std::vector<double> solid_fraction(const ScenarioSpec& spec, const Grid2& g) {
  std::vector<double> f(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec2 c = g.center(k);
    f[k] = spec.initial.is_analytic() ? std::clamp(0.5 - spec.initial.signed_distance(c) / g.h, 0.0, 1.0)
                                      : (spec.initial.contains(c) ? 1.0 : 0.0);
  }
  return f;
}

inline bool touches_open_edge(const Grid2& g, const std::vector<std::uint8_t>& in, const std::vector<double>& solid) {
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const bool edge = i < 2 || i + 2 >= g.nx || (!g.periodic_y && (j < 2 || j + 2 >= g.ny));
      const std::size_t k = g.index(i, j);
      if (edge && in[k] && solid[k] < 0.5) return true;
    }
  return false;
}

inline std::size_t boundary_cells(const RegionMask& m) {
  const Grid2& g = m.grid;
  std::size_t n = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!m.inside[g.index(i, j)]) continue;
      bool b = false;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int ii = i + di;
        int jj = j + dj;
        if (ii < 0 || ii >= g.nx) continue;
        if (g.periodic_y) jj = g.wrap_j(jj);
        else if (jj < 0 || jj >= g.ny) continue;
        if (!m.inside[g.index(ii, jj)]) b = true;
      }
      n += b;
    }
  return n;
}

inline double boundary_energy0(const ScenarioSpec& spec, const Grid2& g, double eps) {
  const RegionMask solid = rasterize(spec.initial, g);
  return boundary_integral(solid, [&](Vec2 p) { return spec.gamma + spec.v0(p) + eps; });
}

}  // namespace detail

struct PerimeterSample {
  double t = 0.0;
  double lhs = 0.0;  // gamma * perimeter
  double rhs = 0.0;
  double slack = 0.0;
};

//! gamma * Per(D_t) against int (gamma + V0 + eps) dH - int_{D_t \ Gamma} (1 + u)
//! on the final set and a ladder of sublevels.
inline Check check_perimeter_bound(const ArrivalField& field, const ScenarioSpec& spec, double eps, double tol,
                                   std::vector<PerimeterSample>* samples = nullptr, std::size_t ladder = 10) {
  const char* name = "perimeter_bound";
  const char* property = "gamma Per(D_t) <= int (gamma+V0) dH - int_{D_t minus Gamma} (1+u)";
  const Grid2& g = field.grid();
  const auto solid = detail::solid_fraction(spec, g);
  std::vector<std::uint8_t> reached(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) reached[k] = !is_unreached(field.w.values[k]);
  if (detail::touches_open_edge(g, reached, solid))
    return skipped(name, property, "the set {w < inf} reaches the box");
  const double b0 = detail::boundary_energy0(spec, g, eps);
  const double h2 = g.h * g.h;
  std::vector<double> ts;
  const double top = field.max_finite();
  for (std::size_t i = 1; i <= ladder; ++i) ts.push_back(top * static_cast<double>(i) / static_cast<double>(ladder));
  ts.push_back(kUnreached);
  double worst = 0.0;
  for (double t : ts) {
    const auto phi = field.sublevel_level(t);
    const RegionMask m = RegionMask::from_level(g, phi);
    double vol = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double frac = std::max(0.0, std::clamp(0.5 - phi[k] / g.h, 0.0, 1.0) - solid[k]);
      if (frac > 0.0) vol += frac * (1.0 + spec.u(g.center(k))) * h2;
    }
    PerimeterSample s{t, spec.gamma * perimeter(m), b0 - vol,
                      spec.gamma * 4.0 * h2 * static_cast<double>(detail::boundary_cells(m))};
    const double allowed = s.rhs * (1.0 + tol) + s.slack;
    worst = std::max(worst, allowed > 0.0 ? s.lhs / allowed : (s.lhs > 0.0 ? kUnreached : 0.0));
    if (samples) samples->push_back(s);
  }
  return decide(name, property, worst, 1.0, tol, worst <= 1.0, "worst ratio of lhs to the allowed bound");
}

//! Lattice total variation of w ∧ T against (T/gamma)(2 kappa + int (1+u)^-).
inline Check check_tv_bound(const ArrivalField& field, const ScenarioSpec& spec, double eps, double tol,
                            std::optional<double> cap = std::nullopt) {
  const char* name = "tv_bound";
  const char* property = "TV(w^T) <= (T/gamma)(2 kappa + int (1+u)^-)";
  const Grid2& g = field.grid();
  double T = cap.value_or(spec.cap.value_or(field.max_finite()));
  T = std::min(T, field.max_finite());
  if (!std::isfinite(T)) return skipped(name, property, "no finite cap");
  const auto capped = field.capped(T);
  const double tv = total_variation(capped);
  const RegionMask solid = rasterize(spec.initial, g);
  double neg = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!solid.inside[k] && field.w.values[k] <= T) neg += std::max(0.0, -(1.0 + spec.u(g.center(k))));
  neg *= g.h * g.h;
  const double kappa = detail::boundary_energy0(spec, g, eps) + neg;
  const double bound = T / spec.gamma * (2.0 * kappa + neg);
  return decide(name, property, tv, bound, tol, tv <= bound * (1.0 + tol));
}

//! E(t) = B0 - B(t) - int_{D_t \ Gamma}(1+u) matches what arrests, collisions and exits removed.
inline Check check_energy_balance(const FrontRun& run, double tol) {
  const auto& last = run.ledger.series.back();
  const double e = last.excess(run.ledger.b0);
  const double err = std::abs(e - last.locked - last.outflow) / run.ledger.b0;
  return decide("energy_balance", "B0 = B(t) + int (1+u) + locked + outflow", err, tol, tol, err <= tol,
                "relative to B0");
}

//! E >= 0 throughout and E = 0 before the first collision, collapse, exit or arrest.
inline Check check_admissibility(const FrontRun& run, double tol) {
  const double b0 = run.ledger.b0;
  const double window = std::min(run.ledger.first_event, run.ledger.first_arrest);
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& e : run.ledger.series) {
    const double x = e.excess(b0) / b0;
    lo = std::min(lo, x);
    if (e.t < window) hi = std::max(hi, x);
  }
  const double measured = std::max(hi, -lo);
  return decide("admissibility", "E(t) >= 0, and E(t) = 0 before the first topology event", measured, tol, tol,
                measured <= tol, "max(sup E before first event, -inf E) / B0");
}

//! Family of the symmetric closed forms, if any.
enum class Family { none, one_interface, two_interface, radial_growing, radial_shrinking };

inline Family family_of(const ScenarioSpec& s) {
  const bool u_ok1 = s.u.kind == UKind::constant || s.u.kind == UKind::piecewise1d;
  const bool u_okr = s.u.kind == UKind::constant || s.u.kind == UKind::radial_piecewise;
  switch (s.initial.kind) {
    case RegionKind::half_line: return u_ok1 ? Family::one_interface : Family::none;
    case RegionKind::interval_complement: return u_ok1 ? Family::two_interface : Family::none;
    case RegionKind::ball: return u_okr && s.v0.kind == V0Kind::constant ? Family::radial_growing : Family::none;
    case RegionKind::ball_complement:
      return u_okr && s.v0.kind == V0Kind::constant ? Family::radial_shrinking : Family::none;
    default: return Family::none;
  }
}

struct OracleOptions {
  double eps = 1e-3;
  double front_tol = 0.02;
  double ode_tol = 1e-6;
  std::size_t probes = 100;
  FrontOptions front;
};

namespace detail {

struct Probe {
  Vec2 p;
  double exact;
};

inline double worst_relative(const std::vector<Probe>& probes, const ScalarField2& w) {
  double worst = 0.0;
  for (const auto& pr : probes) {
    const double got = sample(w, pr.p);
    const double err = std::abs(got - pr.exact) / std::max(std::abs(pr.exact), 1e-12);
    worst = std::max(worst, std::isfinite(err) ? err : kUnreached);
  }
  return worst;
}

}  // namespace detail

//! Cross-checks closedform, the 1D ODE, front tracking and fast marching on a
//! symmetric scenario. Probes stay where w is at most its value at 90% of the extent.
inline std::vector<Check> oracle_equivalence(const ScenarioSpec& spec_in, const GridSpec& gs, const OracleOptions& opt = {}) {
  std::vector<Check> out;
  ScenarioSpec spec = spec_in;
  spec.cap.reset();
  const Family fam = family_of(spec);
  const char* property = "general solvers reproduce the closed-form minimal solution";
  if (fam == Family::none) {
    out.push_back(skipped("oracle", property, "scenario is not one of the symmetric families"));
    return out;
  }
  if (!(spec.v0.min_value() > 0.0)) {
    out.push_back(skipped("oracle", property, "V0 = 0: the closed form is the jump itself, see jump-size"));
    return out;
  }
  const Grid2 g = gs.make();
  const std::size_t n = opt.probes;
  std::vector<detail::Probe> probes;
  const double ymid = g.origin.y + 0.5 * g.height();

  // Exact profile, probes and the jump-set extent.
  double extent_exact = 0.0;
  std::function<double(const ArrivalField&, const FrontRun*)> extent_of;
  switch (fam) {
    case Family::one_interface: {
      const auto sol = solve_one_interface(spec);
      const double a = spec.initial.left;
      const double reach = std::min(std::isfinite(sol.x_star) ? sol.x_star : kUnreached,
                                    g.origin.x + g.width() - a - 2 * g.h);
      for (std::size_t k = 1; k <= n; ++k) {
        const double x = 0.9 * reach * static_cast<double>(k) / static_cast<double>(n);
        probes.push_back({{a + x, ymid}, sol.w(x)});
      }
      const auto ode = solve_arrival_ode(spec.u.axis_profile().shifted(a), spec.v0(Vec2{a, 0.0}));
      double worst = 0.0;
      for (const auto& pr : probes)
        worst = std::max(worst, std::abs(ode.w(pr.p.x - a) - pr.exact) / std::max(pr.exact, 1e-12));
      const double ext_err = std::isfinite(sol.x_star)
                                 ? std::abs(ode.x_star - sol.x_star) / std::max(sol.x_star, 1e-12)
                                 : (std::isfinite(ode.x_star) ? kUnreached : 0.0);
      out.push_back(decide("oracle.ode1d", property, std::max(worst, ext_err), 0.0, opt.ode_tol,
                           std::max(worst, ext_err) <= opt.ode_tol, "arrival ODE vs quadrature"));
      extent_exact = sol.x_star;
      extent_of = [g, solid = detail::solid_fraction(spec, g)](const ArrivalField& f, const FrontRun*) {
        const auto phi = f.sublevel_level(kUnreached);
        double area = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
          area += std::max(0.0, std::clamp(0.5 - phi[k] / g.h, 0.0, 1.0) - solid[k]);
        return area * g.h * g.h / g.height();
      };
      break;
    }
    case Family::two_interface: {
      const auto sol = solve_two_interface(spec);
      const double len = sol.b - sol.a;
      const double top = std::isfinite(sol.crossing) ? sol.crossing : sol.a + 0.5 * len;
      for (std::size_t k = 1; k <= n; ++k) {
        const double x = sol.a + 0.9 * (top - sol.a) * static_cast<double>(k) / static_cast<double>(n);
        probes.push_back({{x, ymid}, sol.w(x)});
      }
      const Profile1D& u = spec.u.axis_profile();
      const auto left = solve_arrival_ode(u.shifted(sol.a), spec.v0(Vec2{sol.a, 0.0}));
      const auto right = solve_arrival_ode(u.mirrored(0.5 * sol.b), spec.v0(Vec2{sol.b, 0.0}));
      double worst = 0.0;
      for (const auto& pr : probes) {
        const double w = std::min(left.w(pr.p.x - sol.a), right.w(sol.b - pr.p.x));
        worst = std::max(worst, std::abs(w - pr.exact) / std::max(pr.exact, 1e-12));
      }
      out.push_back(decide("oracle.ode1d", property, worst, 0.0, opt.ode_tol, worst <= opt.ode_tol,
                           "arrival ODE vs quadrature"));
      if (!std::isfinite(sol.t_star)) out.push_back(skipped("oracle.lock_in", property, "fronts do not meet"));
      extent_exact = sol.t_star;
      extent_of = [](const ArrivalField&, const FrontRun* run) { return run ? run->ledger.first_event : kUnreached; };
      break;
    }
    case Family::radial_growing:
    case Family::radial_shrinking: {
      const auto sol = solve_radial(spec);
      const Vec2 c = spec.initial.center;
      const double r0 = spec.initial.radius;
      const bool grow = fam == Family::radial_growing;
      const double reach = grow ? std::min(sol.r_star, g.origin.x + g.width() - c.x - 2 * g.h) : sol.r_star;
      for (std::size_t k = 1; k <= n; ++k) {
        const double s = 0.9 * static_cast<double>(k) / static_cast<double>(n);
        const double r = grow ? r0 + s * (reach - r0) : r0 - s * (r0 - std::max(reach, 0.1 * r0));
        const double ang = 0.3 + 2.0 * static_cast<double>(k);
        probes.push_back({c + Vec2{r * std::cos(ang), r * std::sin(ang)}, sol.w(r)});
      }
      out.push_back(skipped("oracle.ode1d", property, "no 1D ODE for radial problems"));
      if (grow) {
        extent_exact = sol.r_star;
        extent_of = [g](const ArrivalField& f, const FrontRun*) {
          const auto phi = f.sublevel_level(kUnreached);
          double area = 0.0;
          for (std::size_t k = 0; k < g.size(); ++k) area += std::clamp(0.5 - phi[k] / g.h, 0.0, 1.0);
          return std::sqrt(area * g.h * g.h / std::numbers::pi);
        };
      } else {
        extent_exact = sol.r_star > 0.0 ? sol.r_star : sol.w(0.0);
        const bool vanish = sol.r_star == 0.0;
        extent_of = [vanish](const ArrivalField& f, const FrontRun*) { return vanish ? f.max_finite() : kUnreached; };
      }
      break;
    }
    case Family::none: break;
  }

  // Front tracking in the 2D embedding.
  const FrontRun run = run_front(spec, g, opt.eps, opt.front);
  {
    const double worst = detail::worst_relative(probes, run.field.w);
    out.push_back(decide("oracle.fronttrack", property, worst, 0.0, opt.front_tol, worst <= opt.front_tol,
                         "worst relative error of w at the probes"));
    const double ext = extent_of(run.field, &run);
    if (std::isfinite(extent_exact) && std::isfinite(ext)) {
      const double err = std::abs(ext - extent_exact) / std::max(std::abs(extent_exact), 1e-12);
      out.push_back(decide("oracle.fronttrack_extent", property, err, 0.0, opt.front_tol, err <= opt.front_tol,
                           "jump set extent (or meeting / vanishing time)"));
    }
    if (fam == Family::two_interface) {
      const auto sol = solve_two_interface(spec);
      if (sol.locked_energy) {
        const auto& last = run.ledger.series.back();
        const double scale = g.height();
        const double e = last.excess(run.ledger.b0) / scale;
        const double err = std::abs(e - *sol.locked_energy) / std::abs(*sol.locked_energy);
        out.push_back(decide("oracle.locked_energy", property, err, 0.0, opt.front_tol, err <= opt.front_tol,
                             "final excess per unit width vs the closed form"));
      }
    }
  }

  // Fast marching with the closed-form cost.
  {
    const RegionMask mask = rasterize(spec.initial, g);
    ArrivalField f;
    f.w = fast_march(mask, closed_form_cost(spec, g, 0.0));
    const double worst = detail::worst_relative(probes, f.w);
    out.push_back(decide("oracle.eikonal", property, worst, 0.0, opt.front_tol, worst <= opt.front_tol,
                         "worst relative error of w at the probes"));
  }
  return out;
}

struct VerifyOptions {
  std::optional<double> grid_h;
  std::optional<std::uint64_t> seed;
  bool oracle = true;
  bool equilibrium = true;
  FrontOptions front;
};

//! Full battery for one scenario: front tracking with its attached checks, the
//! oracle comparison on symmetric families and the equilibrium fixed point.
inline VerificationReport verify_scenario(const ScenarioSpec& spec_in, const VerifyOptions& opt = {}) {
  ScenarioSpec spec = spec_in;
  if (opt.seed) spec.seed = *opt.seed;
  VerificationReport rep;
  rep.digest = scenario_digest(spec);
  rep.seed = spec.seed;
  const double eps = spec.eps();
  GridSpec gs = spec.grid ? *spec.grid : default_grid(spec, opt.grid_h.value_or(5e-3));
  if (opt.grid_h) {
    gs.h = *opt.grid_h;
    if (!spec.grid) gs = default_grid(spec, *opt.grid_h);
  }
  rep.grid = gs;
  const Grid2 g = gs.make();
  const Tolerances& tol = spec.tolerances;

  const FrontRun run = run_front(spec, g, eps, opt.front);
  rep.checks.push_back(check_perimeter_bound(run.field, spec, eps, tol.perimeter));
  rep.checks.push_back(check_tv_bound(run.field, spec, eps, tol.tv));
  rep.checks.push_back(check_energy_balance(run, tol.energy));
  rep.checks.push_back(check_admissibility(run, tol.energy));

  const Family fam = family_of(spec);
  if (opt.oracle && fam != Family::none) {
    OracleOptions o;
    o.eps = eps;
    o.front_tol = tol.front_oracle;
    o.ode_tol = tol.ode_oracle;
    o.front = opt.front;
    for (auto& c : oracle_equivalence(spec, gs, o)) rep.checks.push_back(std::move(c));
  }

  if (opt.equilibrium) {
    const char* property = "L = 1/(kappa q - gamma) on {q > gamma/kappa}";
    if (fam == Family::one_interface || fam == Family::radial_growing) {
      const RegionMask solid = rasterize(spec.initial, g);
      const double per_cell = spec.paths * g.h / std::max(perimeter(solid), g.h);
      if (per_cell < 100.0) {
        rep.checks.push_back(skipped("equilibrium.fixed_point", property,
                                     "fewer than 100 paths per boundary cell; raise paths or use a narrower box"));
        return rep;
      }
      ArrivalField f = closed_form_field(spec, g, eps);
      EquilibriumOptions eo;
      eo.paths = spec.paths;
      eo.seed = spec.seed;
      eo.cost = closed_form_cost(spec, g, eps);
      if (spec.cap) eo.cap = *spec.cap;
      try {
        const auto st = build_from_solution(f, spec, eps, eo);
        const double r = fixed_point_residual(st);
        rep.checks.push_back(decide("equilibrium.fixed_point", property, r, 0.0, tol.residual, r <= tol.residual));
        const auto bc = check_boundary_condition(st, spec, eps);
        rep.checks.push_back(decide("equilibrium.boundary", "kappa Q(y_theta, beta = theta) = (gamma + V0) dH",
                                    bc.max_deviation, 0.0, tol.boundary, bc.max_deviation <= tol.boundary));
      } catch (const std::exception& e) {
        Check c = decide("equilibrium.fixed_point", property, kUnreached, 0.0, tol.residual, false, e.what());
        rep.checks.push_back(c);
      }
    } else {
      rep.checks.push_back(skipped("equilibrium.fixed_point", property, "no closed-form field for this scenario"));
    }
  }
  return rep;
}

}  // namespace cascade
