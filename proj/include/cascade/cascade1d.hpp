#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "cascade/closedform.hpp"
#include "cascade/profile.hpp"
#include "cascade/quadrature.hpp"

namespace cascade {

struct FastOdeOptions {
  double v0 = 0.0;  // initial excess speed; 0 reproduces the jump condition
  double scale = 1.0;
  double horizon = 1e6;
  double local_tolerance = 1e-10;
  double stationary_speed = 1e-12;
  double max_dt = 0.01;
};

//! Trajectory of the front x(t) on the fast time scale.
struct FastOdeTrace {
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> speeds;
  double limit = 0.0;
  bool converged = false;
  bool blew_up = false;

  //! inf{t : x(t) >= x} using cubic Hermite interpolation between samples.
  double arrival_time(double x) const {
    if (positions.empty() || x <= positions.front()) return 0.0;
    auto it = std::lower_bound(positions.begin(), positions.end(), x);
    if (it == positions.end()) return kInfinity;
    const std::size_t k = static_cast<std::size_t>(it - positions.begin());
    const double t0 = times[k - 1];
    const double dt = times[k] - t0;
    const double x0 = positions[k - 1];
    const double x1 = positions[k];
    const double m0 = speeds[k - 1] * dt;
    const double m1 = speeds[k] * dt;
    auto hermite = [&](double s) {
      const double s2 = s * s;
      const double s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * x1 + (s3 - s2) * m1;
    };
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (hermite(mid) >= x) hi = mid;
      else lo = mid;
    }
    return t0 + hi * dt;
  }
};

//! x'(t) = v0 - int_{lambda0}^{x} (1 + u_bar), x(0) = lambda0 + eps, classic RK4
//! with step-doubling error control.
inline FastOdeTrace integrate_fast_ode(const Profile1D& u_bar, double lambda0, double eps, double t_end,
                                       const FastOdeOptions& opt = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  auto f = [&](double x) { return opt.v0 - u_bar.integral(lambda0, x, 1.0); };
  auto rk4 = [&](double x, double dt) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * dt * k1);
    const double k3 = f(x + 0.5 * dt * k2);
    const double k4 = f(x + dt * k3);
    return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };
  FastOdeTrace tr;
  double t = 0.0;
  double x = lambda0 + eps;
  double dt = std::min(opt.max_dt, 1e-3);
  tr.times.push_back(t);
  tr.positions.push_back(x);
  tr.speeds.push_back(f(x));
  while (true) {
    const double speed = tr.speeds.back();
    if (std::abs(speed) < opt.stationary_speed) {
      tr.converged = true;
      tr.limit = x;
      break;
    }
    if (x - lambda0 > opt.horizon * opt.scale) {
      tr.blew_up = true;
      tr.limit = kInfinity;
      break;
    }
    if (t >= t_end) {
      tr.limit = x;
      break;
    }
    dt = std::min({dt, opt.max_dt, t_end - t});
    const double full = rk4(x, dt);
    const double half = rk4(rk4(x, 0.5 * dt), 0.5 * dt);
    const double err = std::abs(half - full) / 15.0;
    const double tol = opt.local_tolerance * std::max(opt.scale, std::abs(x - lambda0));
    if (err > tol && dt > 1e-14) {
      dt *= std::max(0.2, 0.9 * std::pow(tol / err, 0.2));
      continue;
    }
    x = half + (half - full) / 15.0;
    t += dt;
    tr.times.push_back(t);
    tr.positions.push_back(x);
    tr.speeds.push_back(f(x));
    dt *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(tol / err, 0.2)) : 5.0;
  }
  return tr;
}

//! Limit of the fast ODE as eps -> 0, by Richardson extrapolation in eps over a ladder.
struct EpsExtrapolation {
  std::vector<double> eps;
  std::vector<double> limits;
  double extrapolated = 0.0;
  bool monotone = true;
};

inline EpsExtrapolation extrapolate_fast_ode(const Profile1D& u_bar, double lambda0, const std::vector<double>& ladder,
                                             double t_end, const FastOdeOptions& opt = {}) {
  EpsExtrapolation ex;
  for (double e : ladder) {
    const auto tr = integrate_fast_ode(u_bar, lambda0, e, t_end, opt);
    ex.eps.push_back(e);
    ex.limits.push_back(tr.limit);
  }
  const std::size_t n = ex.limits.size();
  for (std::size_t k = 1; k < n; ++k)
    if (ex.limits[k] < ex.limits[k - 1] - 1e-12) ex.monotone = false;
  if (n == 0) return ex;
  if (n == 1 || !std::isfinite(ex.limits[n - 1]) || !std::isfinite(ex.limits[n - 2])) {
    ex.extrapolated = ex.limits.back();
    return ex;
  }
  // Linear extrapolation in eps to eps = 0 from the two smallest values.
  const double e1 = ex.eps[n - 2];
  const double e2 = ex.eps[n - 1];
  const double l1 = ex.limits[n - 2];
  const double l2 = ex.limits[n - 1];
  ex.extrapolated = l2 - (l1 - l2) * e2 / (e1 - e2);
  return ex;
}

//! Arrival-time profile from w'' = (1 + u) w'^2, integrated through V = 1/w'.
struct ArrivalProfile {
  Profile1D u;
  double v0 = 0.0;
  double x_star = kInfinity;
  std::vector<double> knots;  // piece boundaries from 0
  std::vector<double> w_at;   // w at the knots
  std::vector<double> v_at;   // V at the knots
  std::vector<double> c_at;   // 1 + u on the piece starting at each knot

  double v(double x) const { return v0 - u.integral(0.0, x, 1.0); }

  double w(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= x_star) return kInfinity;
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), x) - knots.begin()) - 1;
    return w_at[k] + segment(v_at[k], c_at[k], x - knots[k]);
  }

  std::vector<double> w_many(const std::vector<double>& xs) const {
    std::vector<double> out(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) out[k] = w(xs[k]);
    return out;
  }

  //! int_0^s dz / (v - c z).
  static double segment(double v, double c, double s) {
    if (std::abs(c * s) < 1e-6 * v) {
      const double r = c * s / v;
      return s / v * (1.0 + r / 2.0 + r * r / 3.0 + r * r * r / 4.0);
    }
    return -std::log1p(-c * s / v) / c;
  }
};

inline ArrivalProfile solve_arrival_ode(const Profile1D& u, double v0) {
  if (!(v0 > 0.0)) throw std::invalid_argument("v0 must be positive");
  ArrivalProfile p;
  p.u = u;
  p.v0 = v0;
  double x = 0.0;
  double w = 0.0;
  double v = v0;
  std::vector<double> ends;
  for (double b : u.breaks())
    if (b > 0.0) ends.push_back(b);
  ends.push_back(kInfinity);
  for (double end : ends) {
    const double c = 1.0 + u(std::isfinite(end) ? 0.5 * (x + end) : x + 1.0);
    p.knots.push_back(x);
    p.w_at.push_back(w);
    p.v_at.push_back(v);
    p.c_at.push_back(c);
    const double stop = c > 0.0 ? x + v / c : kInfinity;
    if (stop <= end) {
      p.x_star = stop;
      return p;
    }
    if (!std::isfinite(end)) return p;
    w += ArrivalProfile::segment(v, c, end - x);
    v -= c * (end - x);
    x = end;
  }
  return p;
}

inline void write_trace_csv(std::ostream& os, const FastOdeTrace& tr) {
  os << "t,x1\n";
  os.precision(17);
  for (std::size_t k = 0; k < tr.times.size(); ++k) os << tr.times[k] << ',' << tr.positions[k] << '\n';
}

}  // namespace cascade
