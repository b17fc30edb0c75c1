#pragma once

#include <cmath>
#include <functional>

#include "cascade/domain.hpp"

namespace testing_support {

using cascade::GridSpec;
using cascade::RegionKind;
using cascade::ScenarioSpec;
using cascade::UField;
using cascade::Vec2;

//! Composite Simpson rule with n (even) panels; independent of the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

//! One interface with constant 1 + u = c > 0: V = v0 - c x.
inline double one_interface_w(double x, double v0, double c) { return -std::log1p(-c * x / v0) / c; }

//! Radial front in 2D with u = -1: V(r) = ((gamma + v0) r0 - gamma r) / r.
inline double radial_w(double r_from, double r_to, double gamma, double v0, double r0) {
  return simpson([&](double z) { return z / ((gamma + v0) * r0 - gamma * z); }, std::min(r_from, r_to),
                 std::max(r_from, r_to));
}

inline ScenarioSpec one_interface(double u, double v0, double gamma = 1.0) {
  ScenarioSpec s;
  s.gamma = gamma;
  s.dimension = 1;
  s.u = UField::constant(u);
  s.initial.kind = RegionKind::half_line;
  s.initial.left = 0.0;
  s.v0.value = v0;
  return s;
}

inline ScenarioSpec two_interface(double u, double v0, double gamma = 1.0) {
  ScenarioSpec s = one_interface(u, v0, gamma);
  s.initial.kind = RegionKind::interval_complement;
  s.initial.left = 0.0;
  s.initial.right = 1.0;
  return s;
}

inline ScenarioSpec disk(RegionKind kind, double u, double v0, double r0 = 1.0, double gamma = 1.0) {
  ScenarioSpec s;
  s.gamma = gamma;
  s.u = UField::constant(u);
  s.initial.kind = kind;
  s.initial.radius = r0;
  s.v0.value = v0;
  return s;
}

inline GridSpec strip(double x0, double x1, double h, int rows = 20) { return {x0, x1, 0.0, rows * h, h, true}; }

inline GridSpec square(double half, double h) { return {-half, half, -half, half, h, false}; }

}  // namespace testing_support
