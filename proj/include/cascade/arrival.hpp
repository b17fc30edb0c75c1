#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cascade/domain.hpp"

namespace cascade {

//! Central-difference gradient of a field with unreached cells; falls back to
//! one-sided differences (second order where possible) next to unreached cells and the box edge.
inline std::vector<Vec2> gradient_field(const ScalarField2& f) {
  const Grid2& g = f.grid;
  std::vector<Vec2> out(g.size());
  auto value = [&](int i, int j, double& v) {
    if (i < 0 || i >= g.nx) return false;
    if (g.periodic_y) j = g.wrap_j(j);
    else if (j < 0 || j >= g.ny) return false;
    v = f.values[g.index(i, j)];
    return !is_unreached(v);
  };
  auto diff = [&](int i, int j, int di, int dj) {
    double c = 0.0, m = 0.0, p = 0.0;
    if (!value(i, j, c)) return 0.0;
    const bool hm = value(i - di, j - dj, m);
    const bool hp = value(i + di, j + dj, p);
    if (hm && hp) return (p - m) / (2.0 * g.h);
    double far;
    if (hp) return value(i + 2 * di, j + 2 * dj, far) ? (4.0 * p - 3.0 * c - far) / (2.0 * g.h) : (p - c) / g.h;
    if (hm) return value(i - 2 * di, j - 2 * dj, far) ? (3.0 * c - 4.0 * m + far) / (2.0 * g.h) : (c - m) / g.h;
    return 0.0;
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out[g.index(i, j)] = {diff(i, j, 1, 0), diff(i, j, 0, 1)};
  return out;
}

//! Bilinear interpolation weights of the four cell centres around p.
struct Bilinear {
  std::size_t k[4];
  double wt[4];
  bool valid = false;
};

inline Bilinear bilinear_stencil(const Grid2& g, Vec2 p) {
  Bilinear b;
  double sx = (p.x - g.origin.x) / g.h - 0.5;
  double sy = (p.y - g.origin.y) / g.h - 0.5;
  sx = std::clamp(sx, 0.0, static_cast<double>(g.nx - 1));
  if (!g.periodic_y) sy = std::clamp(sy, 0.0, static_cast<double>(g.ny - 1));
  if (!std::isfinite(sx) || !std::isfinite(sy)) return b;
  int i0 = std::min(static_cast<int>(std::floor(sx)), g.nx - 2);
  int j0 = static_cast<int>(std::floor(sy));
  if (!g.periodic_y) j0 = std::min(j0, g.ny - 2);
  const double fx = sx - i0;
  const double fy = sy - j0;
  const int j1 = g.periodic_y ? g.wrap_j(j0 + 1) : j0 + 1;
  j0 = g.periodic_y ? g.wrap_j(j0) : j0;
  b.k[0] = g.index(i0, j0);
  b.k[1] = g.index(i0 + 1, j0);
  b.k[2] = g.index(i0, j1);
  b.k[3] = g.index(i0 + 1, j1);
  b.wt[0] = (1 - fx) * (1 - fy);
  b.wt[1] = fx * (1 - fy);
  b.wt[2] = (1 - fx) * fy;
  b.wt[3] = fx * fy;
  b.valid = true;
  return b;
}

//! Bilinear sample of a field; unreached corners are replaced by the nearest reached one.
inline double sample(const ScalarField2& f, Vec2 p) {
  const Bilinear b = bilinear_stencil(f.grid, p);
  if (!b.valid) return kUnreached;
  double s = 0.0;
  double wsum = 0.0;
  double best_w = -1.0;
  double best_v = kUnreached;
  for (int c = 0; c < 4; ++c) {
    const double v = f.values[b.k[c]];
    if (is_unreached(v)) continue;
    s += b.wt[c] * v;
    wsum += b.wt[c];
    if (b.wt[c] > best_w) {
      best_w = b.wt[c];
      best_v = v;
    }
  }
  if (wsum <= 0.0) return kUnreached;
  if (wsum < 1.0 - 1e-12) return best_v;
  return s;
}

inline Vec2 sample(const std::vector<Vec2>& grad, const Grid2& g, Vec2 p) {
  const Bilinear b = bilinear_stencil(g, p);
  if (!b.valid) return {};
  Vec2 s;
  for (int c = 0; c < 4; ++c) s += b.wt[c] * grad[b.k[c]];
  return s;
}

//! Solution of the cascade equation on the lattice.
struct ArrivalField {
  ScalarField2 w;
  double cap = kUnreached;
  //! Optional signed distance (negative inside {w < inf}) to the final front,
  //! clamped to +-2h. Empty when the solver has no sub-cell front.
  std::vector<double> front_distance;

  const Grid2& grid() const { return w.grid; }
  double max_finite() const { return w.max_finite(); }

  //! Level function of {w <= t} (negative inside) with sub-cell accuracy where
  //! w is smooth and along the final front.
  std::vector<double> sublevel_level(double t) const {
    const Grid2& g = w.grid;
    const double band = 2.0 * g.h;
    const auto grad = gradient_field(w);
    std::vector<double> phi(g.size());
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(i, j);
        const bool reached = !is_unreached(w.values[k]);
        double fd;
        if (!front_distance.empty()) {
          fd = front_distance[k];
        } else if (reached) {
          bool edge = false;
          for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const int ii = i + di;
            int jj = j + dj;
            if (ii < 0 || ii >= g.nx) continue;
            if (g.periodic_y) jj = g.wrap_j(jj);
            else if (jj < 0 || jj >= g.ny) continue;
            if (is_unreached(w.values[g.index(ii, jj)])) edge = true;
          }
          fd = edge ? -0.5 * g.h : -band;
        } else {
          fd = 0.5 * g.h;
        }
        if (!reached) {
          phi[k] = std::max(fd, 1e-12 * g.h);
          continue;
        }
        if (!std::isfinite(t)) {
          phi[k] = std::min(fd, -1e-12 * g.h);
          continue;
        }
        const double slope = std::max(norm(grad[k]), 1e-300);
        const double lv = std::clamp((w.values[k] - t) / slope, -band, band);
        phi[k] = std::max(lv, std::min(fd, -1e-12 * g.h));
        if (w.values[k] <= t) phi[k] = std::min(phi[k], 0.0);
        else phi[k] = std::max(phi[k], 1e-12 * g.h);
      }
    }
    return phi;
  }

  //! D_t = {w <= t}; t = +inf gives {w < inf}.
  RegionMask sublevel(double t) const {
    RegionMask m = RegionMask::from_level(w.grid, sublevel_level(t));
    for (std::size_t k = 0; k < m.inside.size(); ++k) m.inside[k] = w.values[k] <= t ? 1 : 0;
    return m;
  }

  //! w ∧ T with unreached cells mapped to T.
  ScalarField2 capped(double T) const {
    ScalarField2 out = w;
    for (double& v : out.values) v = std::min(v, T);
    return out;
  }
};

//! Isotropic lattice total variation (forward differences).
inline double total_variation(const ScalarField2& f) {
  const Grid2& g = f.grid;
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const bool has_up = g.periodic_y || j + 1 < g.ny;
    const int ju = g.wrap_j(j + 1);
    for (int i = 0; i < g.nx; ++i) {
      const double c = f.values[g.index(i, j)];
      const double dx = i + 1 < g.nx ? f.values[g.index(i + 1, j)] - c : 0.0;
      const double dy = has_up ? f.values[g.index(i, ju)] - c : 0.0;
      s += std::hypot(dx, dy) * g.h;
    }
  }
  return s;
}

}  // namespace cascade
