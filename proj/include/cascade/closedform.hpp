#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "cascade/domain.hpp"
#include "cascade/profile.hpp"
#include "cascade/quadrature.hpp"

namespace cascade {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

//! Adaptive Simpson split at the profile breaks inside (a, b).
template <class F>
double piecewise_quadrature(F&& f, double a, double b, const Profile1D& p, double rel_tol) {
  double s = 0.0;
  p.for_each_piece(a, b, [&](double lo, double hi, double) { s += adaptive_simpson(f, lo, hi, rel_tol); });
  return s;
}

}  // namespace detail

//! Result of the jump-size law for a 1D profile.
struct JumpSize {
  double value = 0.0;
  bool horizon_limited = false;
};

struct JumpOptions {
  double scale = 1.0;
  double horizon = 1e6;
  double tolerance = 1e-10;
};

//! inf{z > 0 : -int_0^z u_bar < z}.
inline JumpSize jump_size_1d(const Profile1D& u_bar, const JumpOptions& opt = {}) {
  auto g = [&](double z) { return -u_bar.integral(0.0, z) - z; };
  // g is linear between consecutive knots (breaks and ladder points), so it is
  // negative somewhere in a knot interval iff it is negative at its right end
  // or crosses there.
  std::vector<double> knots;
  for (double z = opt.scale * 1e-6; z <= opt.horizon; z *= 2.0) knots.push_back(z);
  for (double b : u_bar.breaks())
    if (b > 0.0 && b < opt.horizon) knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  double lo = 0.0;
  for (double z : knots) {
    if (g(z) < 0.0) {
      const double root = bisect_boundary([&](double x) { return g(x) < 0.0; }, lo, z, opt.tolerance * 1e-2);
      return {root, false};
    }
    lo = z;
  }
  // Beyond the last break g has constant slope -(1 + u_tail).
  const double tail_slope = -(1.0 + u_bar.values().back());
  const double last_break = u_bar.breaks().empty() ? 0.0 : u_bar.breaks().back();
  if (last_break < opt.horizon && tail_slope >= 0.0) return {kInfinity, false};
  return {kInfinity, true};
}

//! Minimal solution on the half-line (measured from the interface).
struct OneInterfaceSolution {
  Profile1D u;  // in the local coordinate x >= 0
  double v0 = 0.0;
  double x_star = 0.0;
  //! inf{x : int_0^x (1+u) > v0} without the V0 = 0 convention (may be +inf).
  double raw_extent = 0.0;
  double scale = 1.0;
  double rel_tol = 1e-9;

  double v(double x) const { return v0 - u.integral(0.0, x, 1.0); }

  double w(double x) const {
    if (x <= 0.0) return 0.0;
    if (v0 <= 0.0 || x >= x_star) return kInfinity;
    const double top = std::isfinite(x_star) ? std::min(x, x_star - 1e-8 * scale) : x;
    if (top <= 0.0) return 0.0;
    return detail::piecewise_quadrature([&](double z) { return 1.0 / v(z); }, 0.0, top, u, rel_tol);
  }

  //! w at many points; cheaper than repeated calls because the quadrature is
  //! accumulated between consecutive sorted points.
  std::vector<double> w_many(const std::vector<double>& xs) const {
    std::vector<std::size_t> order(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> out(xs.size());
    double acc = 0.0;
    double at = 0.0;
    const double top = std::isfinite(x_star) ? x_star - 1e-8 * scale : kInfinity;
    for (std::size_t k : order) {
      const double x = xs[k];
      if (x <= 0.0) {
        out[k] = 0.0;
      } else if (v0 <= 0.0 || x >= x_star) {
        out[k] = kInfinity;
      } else {
        const double target = std::min(x, top);
        if (target > at) {
          acc += detail::piecewise_quadrature([&](double z) { return 1.0 / v(z); }, at, target, u, rel_tol);
          at = target;
        }
        out[k] = acc;
      }
    }
    return out;
  }
};

namespace detail {

//! inf{x > 0 : int_0^x (1+u) > v0}, exact piece walk refined by bisection.
inline double first_excess(const Profile1D& u, double v0, double scale) {
  auto f = [&](double x) { return u.integral(0.0, x, 1.0) - v0; };
  double lo = 0.0;
  std::size_t k = u.piece(0.0);
  const auto& br = u.breaks();
  while (true) {
    const double c = 1.0 + u.values()[k];
    const bool last = k >= br.size();
    double hi = last ? kInfinity : br[k];
    if (hi > lo && c > 0.0) {
      double probe = last ? lo + scale : hi;
      if (last) {
        while (!(f(probe) > 0.0)) probe = lo + 2.0 * (probe - lo);
      }
      if (f(probe) > 0.0) {
        if (f(lo) > 0.0) return lo;
        const double tol = 1e-15 * std::max(1.0, std::abs(probe));
        return bisect_boundary([&](double x) { return f(x) > 0.0; }, lo, probe, tol);
      }
    }
    if (last) return kInfinity;
    lo = std::max(lo, hi);
    ++k;
  }
}

}  // namespace detail

inline OneInterfaceSolution solve_one_interface(const Profile1D& u_local, double v0, double scale = 1.0) {
  if (!(v0 >= 0.0)) throw std::invalid_argument("v0 must be nonnegative");
  OneInterfaceSolution s;
  s.u = u_local;
  s.v0 = v0;
  s.scale = scale;
  s.raw_extent = detail::first_excess(u_local, v0, scale);
  s.x_star = v0 <= 0.0 ? 0.0 : s.raw_extent;
  return s;
}

//! Half-line region (-inf, a]: the local coordinate is x - a.
inline OneInterfaceSolution solve_one_interface(const ScenarioSpec& spec) {
  if (spec.initial.kind != RegionKind::half_line) throw std::invalid_argument("one-interface solver needs a half_line region");
  const double a = spec.initial.left;
  return solve_one_interface(spec.u.axis_profile().shifted(a), spec.v0(Vec2{a, 0.0}), 1.0);
}

struct TwoInterfaceSolution {
  double a = 0.0;
  double b = 1.0;
  double gamma = 1.0;
  OneInterfaceSolution left;
  OneInterfaceSolution right;  // in the mirrored coordinate b - x
  double x0_star = 0.0;
  double x1_star = 0.0;
  double t_star = kInfinity;
  double crossing = kInfinity;
  std::optional<double> locked_energy;

  double w(double x) const {
    if (x <= a || x >= b) return 0.0;
    return std::min(left.w(x - a), right.w(b - x));
  }
};

inline TwoInterfaceSolution solve_two_interface(const Profile1D& u, double a, double b, double v0_left,
                                                double v0_right, double gamma) {
  if (!(b > a)) throw std::invalid_argument("interval endpoints must be ordered");
  TwoInterfaceSolution s;
  s.a = a;
  s.b = b;
  s.gamma = gamma;
  const double len = b - a;
  s.left = solve_one_interface(u.shifted(a), v0_left, len);
  s.right = solve_one_interface(u.mirrored(0.5 * b), v0_right, len);
  s.x0_star = a + std::min(s.left.raw_extent, len);
  s.x1_star = b - std::min(s.right.raw_extent, len);
  if (s.x0_star > s.x1_star) {
    auto w0 = [&](double x) { return s.left.w(x - a); };
    auto w1 = [&](double x) { return s.right.w(b - x); };
    const double xc = bisect_boundary([&](double x) { return w0(x) >= w1(x); }, s.x1_star, s.x0_star, 1e-14 * len);
    s.crossing = xc;
    s.t_star = std::min(w0(xc), w1(xc));
    s.locked_energy = 2.0 * gamma + v0_left + v0_right - u.integral(a, b, 1.0);
  }
  return s;
}

inline TwoInterfaceSolution solve_two_interface(const ScenarioSpec& spec) {
  if (spec.initial.kind != RegionKind::interval_complement)
    throw std::invalid_argument("two-interface solver needs an interval_complement region");
  const double a = spec.initial.left;
  const double b = spec.initial.right;
  return solve_two_interface(spec.u.axis_profile(), a, b, spec.v0(Vec2{a, 0.0}), spec.v0(Vec2{b, 0.0}), spec.gamma);
}

enum class RadialDirection { growing, shrinking };

struct RadialSolution {
  RadialDirection direction = RadialDirection::growing;
  int d = 2;
  double r0 = 1.0;
  double gamma = 1.0;
  double v0 = 0.0;
  Profile1D u;  // radial profile
  double r_star = 0.0;
  std::optional<double> locked_energy;
  bool non_minimal_certificate = false;
  double rel_tol = 1e-9;

  //! Denominator of the radial integrand.
  double denominator(double r) const {
    const double base = (gamma + v0) * std::pow(r0, d - 1) - gamma * std::pow(r, d - 1);
    if (direction == RadialDirection::growing) return base - u.radial_moment(r0, r, d);
    return base - u.radial_moment(r, r0, d);
  }

  //! Normal speed of the front when it passes radius r.
  double v(double r) const { return denominator(r) / std::pow(r, d - 1); }

  double w(double r) const {
    auto integrand = [&](double z) { return std::pow(z, d - 1) / denominator(z); };
    if (direction == RadialDirection::growing) {
      if (r <= r0) return 0.0;
      if (v0 <= 0.0 || r >= r_star) return kInfinity;
      const double top = std::isfinite(r_star) ? std::min(r, r_star - 1e-8 * r0) : r;
      return detail::piecewise_quadrature(integrand, r0, top, u, rel_tol);
    }
    if (r >= r0) return 0.0;
    if (v0 <= 0.0) return kInfinity;
    if (r_star > 0.0 && r <= r_star) return kInfinity;
    if (r_star == 0.0 && r <= 0.0 && !locked_energy) return kInfinity;
    const double bottom = r_star > 0.0 ? std::max(r, r_star + 1e-8 * r0) : std::max(r, 0.0);
    return detail::piecewise_quadrature(integrand, bottom, r0, u, rel_tol);
  }

  std::vector<double> w_many(const std::vector<double>& rs) const {
    std::vector<std::size_t> order(rs.size());
    for (std::size_t k = 0; k < rs.size(); ++k) order[k] = k;
    const bool grow = direction == RadialDirection::growing;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return grow ? rs[a] < rs[b] : rs[a] > rs[b];
    });
    auto integrand = [&](double z) { return std::pow(z, d - 1) / denominator(z); };
    std::vector<double> out(rs.size());
    double acc = 0.0;
    double at = r0;
    for (std::size_t k : order) {
      const double r = rs[k];
      const double exact = w(r <= 0.0 ? 0.0 : r);
      if (exact == 0.0 || !std::isfinite(exact)) {
        out[k] = exact;
        continue;
      }
      if (grow) {
        const double target = std::isfinite(r_star) ? std::min(r, r_star - 1e-8 * r0) : r;
        if (target > at) {
          acc += detail::piecewise_quadrature(integrand, at, target, u, rel_tol);
          at = target;
        }
      } else {
        const double target = r_star > 0.0 ? std::max(r, r_star + 1e-8 * r0) : std::max(r, 0.0);
        if (target < at) {
          acc += detail::piecewise_quadrature(integrand, target, at, u, rel_tol);
          at = target;
        }
      }
      out[k] = acc;
    }
    return out;
  }
};

namespace detail {

//! First radius above r0 where the growing denominator turns negative.
inline double growing_critical_radius(const RadialSolution& s) {
  const Profile1D& u = s.u;
  const auto& br = u.breaks();
  std::size_t k = u.piece(s.r0);
  double lo = s.r0;
  auto neg = [&](double r) { return s.denominator(r) < 0.0; };
  while (true) {
    const double c = 1.0 + u.values()[k];
    const bool last = k >= br.size();
    const double hi = last ? kInfinity : br[k];
    // On a piece the denominator decreases, then (for c < 0) increases past r_m.
    double rm = hi;
    if (c < 0.0 && s.d > 1) rm = std::clamp(s.gamma * (s.d - 1) / (-c), lo, hi);
    if (last && !std::isfinite(rm)) {
      const bool unbounded_decrease = c > 0.0 || (c == 0.0 && s.d > 1);
      if (!unbounded_decrease) return kInfinity;
      double probe = lo + s.r0;
      while (!neg(probe)) {
        probe = lo + 2.0 * (probe - lo);
        if (probe > 1e12 * s.r0) return kInfinity;
      }
      rm = probe;
    }
    if (hi > lo && std::isfinite(rm) && neg(rm)) {
      if (neg(lo)) return lo;
      return bisect_boundary(neg, lo, rm, 1e-15 * std::max(1.0, rm));
    }
    if (last) return kInfinity;
    lo = std::max(lo, hi);
    ++k;
  }
}

//! sup{r in (0, r0) : shrinking denominator < 0}, or 0.
inline double shrinking_critical_radius(const RadialSolution& s) {
  const Profile1D& u = s.u;
  auto neg = [&](double r) { return s.denominator(r) < 0.0; };
  // Collect pieces of (0, r0) from the top down.
  std::vector<std::pair<double, double>> pieces;
  u.for_each_piece(0.0, s.r0, [&](double lo, double hi, double) { pieces.emplace_back(lo, hi); });
  for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
    const double lo = it->first;
    const double hi = it->second;
    const double c = 1.0 + u((lo + hi) * 0.5);
    // The denominator is minimal on the piece at rm and increases on [rm, hi].
    double rm = hi;
    if (c > 0.0) rm = s.d > 1 ? std::clamp(s.gamma * (s.d - 1) / c, lo, hi) : lo;
    if (neg(rm)) {
      if (neg(hi)) return hi;
      // Denominator increases in r on [rm, hi]; the sup of the negative set is the root.
      double a = rm;
      double b = hi;
      for (int i = 0; i < 200 && b - a > 1e-15 * std::max(1.0, b); ++i) {
        const double mid = 0.5 * (a + b);
        if (neg(mid)) a = mid;
        else b = mid;
      }
      return a;
    }
  }
  return 0.0;
}

}  // namespace detail

inline RadialSolution solve_radial(RadialDirection dir, int d, double r0, double gamma, double v0, const Profile1D& u) {
  if (!(r0 > 0.0) || d < 1 || !(gamma > 0.0) || !(v0 >= 0.0)) throw std::invalid_argument("invalid radial problem");
  RadialSolution s;
  s.direction = dir;
  s.d = d;
  s.r0 = r0;
  s.gamma = gamma;
  s.v0 = v0;
  s.u = u;
  if (v0 <= 0.0) {
    s.r_star = r0;
    return s;
  }
  if (dir == RadialDirection::growing) {
    s.r_star = detail::growing_critical_radius(s);
    return s;
  }
  s.r_star = detail::shrinking_critical_radius(s);
  if (s.r_star == 0.0) {
    const double budget = (gamma + v0) * std::pow(r0, d - 1);
    const double absorbed = u.radial_moment(0.0, r0, d);
    if (absorbed < budget) s.locked_energy = budget - absorbed;
  } else {
    // The formula is certified only when the integral diverges at r_star, which
    // holds when the denominator vanishes linearly there.
    const double e = 1e-6 * s.r_star;
    const double slope = (s.denominator(s.r_star + e) - s.denominator(s.r_star)) / e;
    if (!(std::abs(slope) > 1e-9 * (gamma + v0))) s.non_minimal_certificate = true;
  }
  return s;
}

inline RadialSolution solve_radial(const ScenarioSpec& spec) {
  if (!spec.initial.is_radial()) throw std::invalid_argument("radial solver needs a ball or ball_complement region");
  if (spec.u.kind == UKind::radial_piecewise) {
    const Vec2 dc = spec.u.center - spec.initial.center;
    if (norm(dc) > 1e-12) throw std::invalid_argument("radial u must share the ball center");
  } else if (spec.u.kind != UKind::constant) {
    throw std::invalid_argument("radial solver needs constant or radial u");
  }
  const auto dir = spec.initial.kind == RegionKind::ball ? RadialDirection::growing : RadialDirection::shrinking;
  const double r0 = spec.initial.radius;
  const Vec2 on_boundary = spec.initial.center + Vec2{r0, 0.0};
  return solve_radial(dir, std::max(spec.dimension, 1), r0, spec.gamma, spec.v0(on_boundary), spec.u.axis_profile());
}

//! CSV rows "coordinate,w,V".
template <class Solution>
void write_profile_csv(std::ostream& os, const Solution& s, const std::vector<double>& coords) {
  os << "coordinate,w,V\n";
  const auto ws = s.w_many(coords);
  os.precision(17);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    os << coords[k] << ',';
    if (std::isfinite(ws[k])) os << ws[k];
    else os << "inf";
    os << ',' << s.v(coords[k]) << '\n';
  }
}

}  // namespace cascade
