#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "cascade/arrival.hpp"
#include "cascade/closedform.hpp"
#include "cascade/domain.hpp"

namespace cascade {

//! Cost L on the lattice. Cells with L = +inf are impassable; L <= 0 costs nothing.
struct CostField {
  ScalarField2 L;
};

namespace detail {

inline double godunov(double a, double b, double f, double h) {
  if (std::isinf(a) && std::isinf(b)) return kUnreached;
  if (std::isinf(a) || std::isinf(b) || std::abs(a - b) >= f * h) return std::min(a, b) + f * h;
  const double d = a - b;
  return 0.5 * (a + b + std::sqrt(2.0 * f * f * h * h - d * d));
}

//! Distance from the centre of cell c to the 0.5 crossing of the indicator
//! towards a neighbour inside the mask.
inline double crossing_distance(double vc, double vn, double h) {
  if (vn - vc <= 1e-12) return 0.5 * h;
  const double t = std::clamp((vn - 0.5) / (vn - vc), 0.0, 1.0);
  return std::max((1.0 - t) * h, 1e-3 * h);
}

}  // namespace detail

//! Fast marching solution of |grad w| = L^+ with w = 0 on the mask.
//! Equal keys are accepted in insertion order.
inline ScalarField2 fast_march(const RegionMask& mask, const CostField& cost) {
  const Grid2& g = mask.grid;
  if (cost.L.values.size() != g.size()) throw std::invalid_argument("cost field does not match the grid");
  if (mask.count() == 0) throw std::invalid_argument("empty initial mask");
  ScalarField2 w(g, kUnreached);
  std::vector<std::uint8_t> state(g.size(), 0);  // 0 far, 1 trial, 2 accepted
  using Key = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> heap;
  std::uint64_t seq = 0;
  auto speed_inv = [&](std::size_t k) { return std::max(0.0, cost.L.values[k]); };
  auto neighbour = [&](int i, int j, int di, int dj, std::size_t& out) {
    const int ii = i + di;
    int jj = j + dj;
    if (ii < 0 || ii >= g.nx) return false;
    if (g.periodic_y) jj = g.wrap_j(jj);
    else if (jj < 0 || jj >= g.ny) return false;
    out = g.index(ii, jj);
    return true;
  };

  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!mask.inside[k]) continue;
    w.values[k] = 0.0;
    state[k] = 2;
  }
  // Sub-cell initialization of the first layer from indicator crossings.
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (state[k] == 2 || std::isinf(cost.L.values[k])) continue;
      double dist[2] = {kUnreached, kUnreached};
      for (int axis = 0; axis < 2; ++axis) {
        for (int s : {-1, 1}) {
          std::size_t n;
          if (!neighbour(i, j, axis == 0 ? s : 0, axis == 1 ? s : 0, n) || !mask.inside[n]) continue;
          dist[axis] = std::min(dist[axis], detail::crossing_distance(mask.indicator[k], mask.indicator[n], g.h));
        }
      }
      double d;
      if (std::isinf(dist[0]) && std::isinf(dist[1])) continue;
      if (std::isinf(dist[0])) d = dist[1];
      else if (std::isinf(dist[1])) d = dist[0];
      else d = dist[0] * dist[1] / std::hypot(dist[0], dist[1]);
      w.values[k] = speed_inv(k) * d;
      state[k] = 1;
      heap.emplace(w.values[k], seq++, k);
    }
  }

  auto update = [&](std::size_t k) {
    const int i = static_cast<int>(k % g.nx);
    const int j = static_cast<int>(k / g.nx);
    double ab[2] = {kUnreached, kUnreached};
    for (int axis = 0; axis < 2; ++axis) {
      for (int s : {-1, 1}) {
        std::size_t n;
        if (neighbour(i, j, axis == 0 ? s : 0, axis == 1 ? s : 0, n) && state[n] == 2)
          ab[axis] = std::min(ab[axis], w.values[n]);
      }
    }
    const double cand = detail::godunov(ab[0], ab[1], speed_inv(k), g.h);
    if (cand < w.values[k]) {
      w.values[k] = cand;
      state[k] = 1;
      heap.emplace(cand, seq++, k);
    }
  };

  while (!heap.empty()) {
    const auto [val, s, k] = heap.top();
    heap.pop();
    if (state[k] == 2 || val != w.values[k]) continue;
    state[k] = 2;
    const int i = static_cast<int>(k % g.nx);
    const int j = static_cast<int>(k / g.nx);
    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      std::size_t n;
      if (neighbour(i, j, di, dj, n) && state[n] != 2 && !std::isinf(cost.L.values[n])) update(n);
    }
  }
  return w;
}

//! Cost field of the closed-form solution, L = 1 / V on the liquid side.
inline CostField closed_form_cost(const ScenarioSpec& spec, const Grid2& g, double eps = 0.0) {
  CostField c{ScalarField2(g, kUnreached)};
  auto fill = [&](auto&& speed) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 p = g.center(k);
      if (spec.initial.contains(p)) {
        c.L.values[k] = 0.0;
        continue;
      }
      const double v = speed(p);
      c.L.values[k] = v > 0.0 ? 1.0 / v : kUnreached;
    }
  };
  switch (spec.initial.kind) {
    case RegionKind::half_line: {
      ScenarioSpec s = spec;
      s.v0.value = spec.v0.max_value() + eps;
      s.v0.kind = V0Kind::constant;
      const auto sol = solve_one_interface(s);
      fill([&](Vec2 p) { return p.x - spec.initial.left < sol.x_star ? sol.v(p.x - spec.initial.left) : 0.0; });
      break;
    }
    case RegionKind::interval_complement: {
      ScenarioSpec s = spec;
      s.v0.left += eps;
      s.v0.right += eps;
      if (s.v0.kind == V0Kind::constant) s.v0.value += eps;
      const auto sol = solve_two_interface(s);
      fill([&](Vec2 p) {
        const double x0 = p.x - sol.a;
        const double x1 = sol.b - p.x;
        const double w0 = sol.left.w(x0);
        const double w1 = sol.right.w(x1);
        if (w0 <= w1) return x0 < sol.x0_star ? sol.left.v(x0) : 0.0;
        return x1 < sol.x1_star ? sol.right.v(x1) : 0.0;
      });
      break;
    }
    case RegionKind::ball:
    case RegionKind::ball_complement: {
      ScenarioSpec s = spec;
      s.v0.value = spec.v0.max_value() + eps;
      s.v0.kind = V0Kind::constant;
      const auto sol = solve_radial(s);
      const bool grow = sol.direction == RadialDirection::growing;
      fill([&](Vec2 p) {
        const double r = norm(p - spec.initial.center);
        const bool ok = grow ? r < sol.r_star : r > sol.r_star;
        return ok ? sol.v(r) : 0.0;
      });
      break;
    }
    default:
      throw std::invalid_argument("no closed-form cost for this initial region");
  }
  return c;
}

//! Closed-form arrival field on the lattice, with V0 raised by eps like the cost.
inline ArrivalField closed_form_field(const ScenarioSpec& spec, const Grid2& g, double eps = 0.0) {
  ArrivalField f;
  f.w = ScalarField2(g, kUnreached);
  f.cap = spec.cap.value_or(kUnreached);
  std::vector<double> coord(g.size());
  auto assign = [&](const auto& sol, auto&& to_coord) {
    for (std::size_t k = 0; k < g.size(); ++k) coord[k] = to_coord(g.center(k));
    const auto w = sol.w_many(coord);
    for (std::size_t k = 0; k < g.size(); ++k) f.w.values[k] = spec.initial.contains(g.center(k)) ? 0.0 : w[k];
  };
  switch (spec.initial.kind) {
    case RegionKind::half_line: {
      ScenarioSpec s = spec;
      s.v0.value = spec.v0.max_value() + eps;
      s.v0.kind = V0Kind::constant;
      assign(solve_one_interface(s), [&](Vec2 p) { return p.x - spec.initial.left; });
      break;
    }
    case RegionKind::interval_complement: {
      ScenarioSpec s = spec;
      s.v0.left += eps;
      s.v0.right += eps;
      if (s.v0.kind == V0Kind::constant) s.v0.value += eps;
      const auto sol = solve_two_interface(s);
      assign(sol.left, [&](Vec2 p) { return p.x - sol.a; });
      const auto left = f.w.values;
      assign(sol.right, [&](Vec2 p) { return sol.b - p.x; });
      for (std::size_t k = 0; k < g.size(); ++k) f.w.values[k] = std::min(f.w.values[k], left[k]);
      break;
    }
    case RegionKind::ball:
    case RegionKind::ball_complement: {
      ScenarioSpec s = spec;
      s.v0.value = spec.v0.max_value() + eps;
      s.v0.kind = V0Kind::constant;
      assign(solve_radial(s), [&](Vec2 p) { return norm(p - spec.initial.center); });
      break;
    }
    default:
      throw std::invalid_argument("no closed-form field for this initial region");
  }
  return f;
}

inline CostField constant_cost(const Grid2& g, double value) { return {ScalarField2(g, value)}; }

//! Time projection: w^{L_T} = w^L ∧ T with L_T = L on {w <= T} and -1/gamma beyond.
struct TimeProjection {
  ScalarField2 w;
  CostField cost;
};

inline TimeProjection t_projection(const ScalarField2& w, const CostField& L, double T, double gamma) {
  TimeProjection p{w, L};
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    p.w.values[k] = std::min(w.values[k], T);
    if (!(w.values[k] <= T)) p.cost.L.values[k] = -1.0 / gamma;
  }
  return p;
}

struct CharacteristicPath {
  std::vector<Vec2> points;
  std::vector<double> cost_to_go;
  double theta = 0.0;  // arclength to the boundary of the initial set
  double beta = 0.0;   // killing time (unit speed parametrization)
  bool trapped = false;
  bool reached_mask = false;
};

//! Steepest-descent path of w from `start` to the initial set, step h/2.
inline CharacteristicPath trace_characteristic(const ScalarField2& w, const RegionMask& mask, Vec2 start,
                                               const std::vector<Vec2>* grad_cache = nullptr) {
  const Grid2& g = w.grid;
  std::vector<Vec2> local;
  if (!grad_cache) local = gradient_field(w);
  const std::vector<Vec2>& grad = grad_cache ? *grad_cache : local;
  CharacteristicPath path;
  Vec2 p = start;
  const double step = 0.5 * g.h;
  const std::size_t max_steps = 8 * static_cast<std::size_t>(g.nx + g.ny) + 16;
  int climbs = 0;
  double wp = sample(w, p);
  for (std::size_t it = 0;; ++it) {
    path.points.push_back(p);
    path.cost_to_go.push_back(wp);
    const auto cell = g.cell_of(p);
    if (!cell) {
      path.trapped = true;
      break;
    }
    if (mask.inside[*cell]) {
      path.reached_mask = true;
      break;
    }
    if (it >= max_steps || is_unreached(wp)) {
      path.trapped = true;
      break;
    }
    const Vec2 gr = sample(grad, g, p);
    const double gn = norm(gr);
    if (gn * g.h < 1e-12 * std::max(1.0, std::abs(wp))) {
      path.trapped = true;
      break;
    }
    const Vec2 q = p - (step / gn) * gr;
    const double wq = sample(w, q);
    climbs = wq > wp ? climbs + 1 : 0;
    if (climbs >= 3) {
      path.trapped = true;
      break;
    }
    path.theta += step;
    p = q;
    wp = wq;
  }
  path.beta = path.theta;
  return path;
}

}  // namespace cascade
