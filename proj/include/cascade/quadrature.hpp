#pragma once

#include <cmath>
#include <algorithm>
#include <stdexcept>

namespace cascade {

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

//! Adaptive Simpson quadrature of f over [a, b].
//!
//! The absolute tolerance is `rel_tol` times a coarse estimate of the integral
//! magnitude, floored at `abs_floor`.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-9, double abs_floor = 1e-15,
                        int max_depth = 48) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, rel_tol, abs_floor, max_depth);
  // Seed on 8 panels so that localized features are not missed.
  constexpr int kPanels = 8;
  double estimate = 0.0;
  double xs[kPanels + 1];
  double fs[kPanels + 1];
  double fm[kPanels];
  double whole[kPanels];
  for (int k = 0; k <= kPanels; ++k) {
    xs[k] = a + (b - a) * k / kPanels;
    fs[k] = f(xs[k]);
  }
  for (int k = 0; k < kPanels; ++k) {
    fm[k] = f(0.5 * (xs[k] + xs[k + 1]));
    whole[k] = (xs[k + 1] - xs[k]) / 6.0 * (fs[k] + 4.0 * fm[k] + fs[k + 1]);
    estimate += std::abs(whole[k]);
  }
  const double tol = std::max(abs_floor, rel_tol * estimate);
  double sum = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    sum += detail::simpson_step(f, xs[k], xs[k + 1], fs[k], fm[k], fs[k + 1], whole[k],
                                tol / kPanels, max_depth);
  }
  return sum;
}

//! Bisection for a sign change of `g` on [lo, hi] where `pred(lo)` is false and
//! `pred(hi)` is true. Returns the last point known to fail the predicate.
template <class P>
double bisect_boundary(P&& pred, double lo, double hi, double tol = 1e-12) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return lo;
}

}  // namespace cascade
