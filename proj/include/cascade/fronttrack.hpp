#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "cascade/arrival.hpp"
#include "cascade/domain.hpp"

namespace cascade {

struct Marker {
  Vec2 pos;
  double v = 0.0;
  double curvature = 0.0;  // positive when the solid is locally convex
  Vec2 normal;             // unit normal into the liquid
  bool alive = true;
  double arrest_time = -1.0;
};

//! Ordered markers with the solid on the left. Closed chains wrap through `wrap`
//! (non-zero when the loop crosses the periodic boundary).
struct Chain {
  std::vector<Marker> m;
  bool closed = false;
  Vec2 wrap;

  std::size_t size() const { return m.size(); }
  std::size_t segments() const { return m.size() < 2 ? 0 : (closed ? m.size() : m.size() - 1); }
  Vec2 seg_end(std::size_t i) const { return i + 1 < m.size() ? m[i + 1].pos : m[0].pos + wrap; }
  double length() const {
    double s = 0.0;
    for (std::size_t i = 0; i < segments(); ++i) s += norm(seg_end(i) - m[i].pos);
    return s;
  }
};

enum class KillReason { arrest, collision, exit, collapse };

struct KillRecord {
  Vec2 pos;
  double v = 0.0;
  double t = 0.0;
  KillReason reason = KillReason::collision;
};

struct LedgerEntry {
  double t = 0.0;
  double boundary = 0.0;    // B(t)
  double volumetric = 0.0;  // int_{D_t \ Gamma} (1 + u)
  double locked = 0.0;      // removed by arrests, collisions and collapses
  double outflow = 0.0;     // removed by markers leaving the box
  std::size_t alive = 0;

  double excess(double b0) const { return b0 - boundary - volumetric; }
};

struct EnergyLedger {
  double b0 = 0.0;
  std::vector<LedgerEntry> series;
  //! Time of the first collision, collapse or box exit (inf if none).
  double first_event = kUnreached;
  //! Time of the first arrest (inf if none).
  double first_arrest = kUnreached;
};

struct FrontOptions {
  double spacing = 1.5;  // resampling spacing in units of h
  double split = 2.0;
  double merge = 0.75;
  double cfl = 0.4;
  double floor_factor = 1e-4;
  double lookahead = 1.0;
  std::size_t max_steps = 5000000;
};

struct Front {
  Grid2 grid;
  double t = 0.0;
  double gamma = 1.0;
  double eps = 0.0;
  double v_floor = 0.0;
  UField u;
  V0Field v0;
  FrontOptions opt;
  std::vector<Chain> chains;
  ScalarField2 w;
  std::vector<std::uint8_t> initial;
  double volumetric = 0.0;
  double locked = 0.0;
  double outflow = 0.0;
  std::vector<KillRecord> kills;
  EnergyLedger ledger;
  std::size_t steps = 0;

  double u_at(Vec2 p) const { return u(grid.wrap(p)); }

  double boundary_energy() const {
    double b = 0.0;
    for (const auto& c : chains) {
      const std::size_t n = c.size();
      const std::size_t ns = c.segments();
      for (std::size_t i = 0; i < ns; ++i) {
        const double len = norm(c.seg_end(i) - c.m[i].pos);
        const auto& a = c.m[i];
        const auto& bm = c.m[(i + 1) % n];
        if (a.alive) b += 0.5 * len * (a.v + gamma);
        if (bm.alive) b += 0.5 * len * (bm.v + gamma);
      }
    }
    return b;
  }

  std::size_t alive_count() const {
    std::size_t s = 0;
    for (const auto& c : chains)
      for (const auto& mk : c.m) s += mk.alive;
    return s;
  }

  void record() {
    LedgerEntry e;
    e.t = t;
    e.boundary = boundary_energy();
    e.volumetric = volumetric;
    e.locked = locked;
    e.outflow = outflow;
    e.alive = alive_count();
    ledger.series.push_back(e);
  }
};

namespace detail {

//! Points at uniform arclength along a polyline (closed loops include the wrap segment).
inline std::vector<Vec2> resample_polyline(const Polyline& pl, double spacing) {
  std::vector<Vec2> pts = pl.pts;
  if (pl.closed) pts.push_back(pl.pts.front() + pl.wrap);
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) cum[k] = cum[k - 1] + norm(pts[k] - pts[k - 1]);
  const double total = cum.back();
  if (total <= 0.0) return {};
  std::size_t n = static_cast<std::size_t>(std::max(1.0, std::round(total / spacing)));
  if (pl.closed) n = std::max<std::size_t>(n, 3);
  const std::size_t count = pl.closed ? n : n + 1;
  std::vector<Vec2> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double f = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back(pts[seg] + f * (pts[seg + 1] - pts[seg]));
  }
  return out;
}

inline void update_geometry(Chain& c) {
  const std::size_t n = c.size();
  if (n < 2) return;
  std::vector<double> raw(n, 0.0);
  std::vector<char> has(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hp = c.closed || i > 0;
    const bool hn = c.closed || i + 1 < n;
    const Vec2 p = c.m[i].pos;
    const Vec2 prev = hp ? (i > 0 ? c.m[i - 1].pos : c.m[n - 1].pos - c.wrap) : p;
    const Vec2 next = hn ? (i + 1 < n ? c.m[i + 1].pos : c.m[0].pos + c.wrap) : p;
    const Vec2 tan = next - prev;
    const double tl = norm(tan);
    if (tl > 0.0) c.m[i].normal = (1.0 / tl) * right_normal(tan);
    if (hp && hn) {
      raw[i] = menger_curvature(prev, p, next);
      has[i] = 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!has[i]) {
      const std::size_t j = i == 0 ? std::min<std::size_t>(1, n - 1) : i - 1;
      c.m[i].curvature = has[j] ? raw[j] : 0.0;
      continue;
    }
    const std::size_t ip = i > 0 ? i - 1 : n - 1;
    const std::size_t in = i + 1 < n ? i + 1 : 0;
    const double a = has[ip] ? raw[ip] : raw[i];
    const double b = has[in] ? raw[in] : raw[i];
    c.m[i].curvature = 0.25 * (a + 2.0 * raw[i] + b);
  }
}

//! Half the length of the adjacent segments of every marker.
inline std::vector<double> marker_weights(const Chain& c) {
  std::vector<double> w(c.size(), 0.0);
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < c.segments(); ++i) {
    const double len = norm(c.seg_end(i) - c.m[i].pos);
    w[i] += 0.5 * len;
    w[(i + 1) % n] += 0.5 * len;
  }
  return w;
}

}  // namespace detail

//! Places markers on the boundary of the initial set.
inline Front initialize_front(const ScenarioSpec& spec, const Grid2& grid, double eps, const FrontOptions& opt = {}) {
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  Front f;
  f.grid = grid;
  f.gamma = spec.gamma;
  f.eps = eps;
  f.u = spec.u;
  f.v0 = spec.v0;
  f.opt = opt;
  f.v_floor = opt.floor_factor * (spec.v0.max_value() + eps);
  const RegionMask mask = rasterize(spec.initial, grid);
  f.initial = mask.inside;
  f.w = ScalarField2(grid, kUnreached);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (mask.inside[k]) f.w.values[k] = 0.0;
  const auto lines = link_segments(grid, mask_contour(mask));
  for (const auto& pl : lines) {
    auto pts = detail::resample_polyline(pl, opt.spacing * grid.h);
    if (pts.size() < 2) continue;
    Chain c;
    c.closed = pl.closed;
    c.wrap = pl.wrap;
    for (Vec2 p : pts) {
      if (spec.initial.is_analytic()) p = spec.initial.project(p);
      Marker mk;
      mk.pos = p;
      mk.v = spec.v0(grid.wrap(p)) + eps;
      c.m.push_back(mk);
    }
    detail::update_geometry(c);
    f.chains.push_back(std::move(c));
  }
  if (f.chains.empty()) throw std::invalid_argument("initial set has no boundary inside the grid");
  f.ledger.b0 = f.boundary_energy();
  f.record();
  return f;
}

inline double stable_dt(const Front& f) {
  double vmax = 0.0;
  double wave = 0.0;
  double kmax = 0.0;
  for (const auto& c : f.chains) {
    for (const auto& mk : c.m) {
      if (!mk.alive) continue;
      vmax = std::max(vmax, mk.v);
      wave = std::max(wave, std::sqrt(mk.v * (mk.v + f.gamma)));
      kmax = std::max(kmax, std::abs(1.0 + f.u_at(mk.pos) + mk.curvature * (mk.v + f.gamma)));
    }
  }
  const double h = f.grid.h;
  double dt = kUnreached;
  if (vmax > 0.0) dt = std::min(dt, h / vmax);
  if (wave > 0.0) dt = std::min(dt, h / wave);
  if (kmax > 0.0) dt = std::min(dt, 1.0 / kmax);
  return std::isinf(dt) ? 1.0 : f.opt.cfl * dt;
}

namespace detail {

//! Splits chains at removed markers; frozen markers stay in place.
inline void remove_markers(Front& f, const std::vector<std::vector<char>>& removed) {
  std::vector<Chain> out;
  for (std::size_t ci = 0; ci < f.chains.size(); ++ci) {
    Chain& c = f.chains[ci];
    const auto& rm = removed[ci];
    const std::size_t n = c.size();
    if (std::none_of(rm.begin(), rm.end(), [](char x) { return x != 0; })) {
      out.push_back(std::move(c));
      continue;
    }
    // Start right after a removed marker so closed chains unroll into one run.
    std::size_t start = 0;
    if (c.closed) {
      for (std::size_t i = 0; i < n; ++i)
        if (rm[i]) {
          start = (i + 1) % n;
          break;
        }
    }
    Chain cur;
    Vec2 offset{};
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t i = (start + s) % n;
      if (c.closed && s > 0 && i == 0) offset = c.wrap;
      if (rm[i]) {
        if (cur.size() >= 2) out.push_back(std::move(cur));
        cur = Chain{};
        continue;
      }
      Marker mk = c.m[i];
      mk.pos += offset;
      cur.m.push_back(mk);
    }
    if (cur.size() >= 2) out.push_back(std::move(cur));
  }
  f.chains = std::move(out);
}

//! Splits long segments (curvature-corrected midpoint) and merges short ones.
inline double chain_energy(const Chain& c, double gamma) {
  const auto w = marker_weights(c);
  double b = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.m[i].alive) b += (c.m[i].v + gamma) * w[i];
  return b;
}

inline void resample_chain(Chain& c, const Front& f) {
  const double h = f.grid.h;
  const double b_before = chain_energy(c, f.gamma);
  const double split = f.opt.split * h;
  const double merge = f.opt.merge * h;
  if (c.size() < 2) return;
  std::vector<Marker> out;
  out.reserve(c.size() + 8);
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(c.m[i]);
    if (!c.closed && i + 1 == n) break;
    const Marker& a = c.m[i];
    const Marker& b = c.m[(i + 1) % n];
    const Vec2 pb = c.seg_end(i);
    const double len = norm(pb - a.pos);
    if (len <= split) continue;
    const int pieces = static_cast<int>(std::ceil(len / split));
    for (int k = 1; k < pieces; ++k) {
      const double s = static_cast<double>(k) / pieces;
      Marker mk;
      const double kap = 0.5 * (a.curvature + b.curvature);
      const Vec2 nrm = (1.0 / len) * right_normal(pb - a.pos);
      // Circular-arc bulge: the solid side is on the left, so convex arcs bulge along +n.
      const double bulge = 0.5 * kap * s * (1.0 - s) * len * len;
      mk.pos = a.pos + s * (pb - a.pos) + bulge * nrm;
      mk.v = (1.0 - s) * a.v + s * b.v;
      mk.curvature = kap;
      mk.alive = a.alive && b.alive;
      if (!mk.alive) {
        mk.v = 0.0;
        mk.arrest_time = std::max(a.arrest_time, b.arrest_time);
      }
      out.push_back(mk);
    }
  }
  c.m = std::move(out);
  // Merge pass: drop a marker whose neighbours are both close, keeping B.
  bool changed = true;
  while (changed && c.size() > 3) {
    changed = false;
    const std::size_t m = c.size();
    std::vector<char> drop(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (!c.closed && (i == 0 || i + 1 == m)) continue;
      const std::size_t ip = i > 0 ? i - 1 : m - 1;
      const std::size_t in = i + 1 < m ? i + 1 : 0;
      if (drop[ip] || (in < m && drop[in])) continue;
      const Vec2 pp = i > 0 ? c.m[ip].pos : c.m[ip].pos - c.wrap;
      const Vec2 pn = i + 1 < m ? c.m[in].pos : c.m[in].pos + c.wrap;
      const double l1 = norm(c.m[i].pos - pp);
      const double l2 = norm(pn - c.m[i].pos);
      if (std::min(l1, l2) >= merge || l1 + l2 > split) continue;
      if (!c.m[i].alive || !c.m[ip].alive || !c.m[in].alive) continue;
      // Redistribute the dropped marker's share onto its neighbours so B is kept.
      const double l = norm(pn - pp);
      const double share = 0.5 * (l1 + l2) * (c.m[i].v + f.gamma);
      const double before = 0.5 * l1 * (c.m[ip].v + f.gamma) + 0.5 * l2 * (c.m[in].v + f.gamma) + share;
      const double base = 0.5 * l * (c.m[ip].v + f.gamma) + 0.5 * l * (c.m[in].v + f.gamma);
      if (l > 0.0) {
        const double dv = (before - base) / l;
        c.m[ip].v += dv;
        c.m[in].v += dv;
      }
      drop[i] = 1;
      changed = true;
    }
    if (changed) {
      std::vector<Marker> keep;
      for (std::size_t i = 0; i < m; ++i)
        if (!drop[i]) keep.push_back(c.m[i]);
      c.m = std::move(keep);
    }
  }
  const double b_after = chain_energy(c, f.gamma);
  if (b_after > 0.0 && b_before > 0.0) {
    const double ratio = b_before / b_after;
    for (auto& mk : c.m)
      if (mk.alive) mk.v = std::max(0.0, (mk.v + f.gamma) * ratio - f.gamma);
  }
}

struct Triangle {
  Vec2 p[3];
  double s[3];
};

}  // namespace detail

//! Marks cells whose centres lie in the triangle with arrival time t0 + dt * (barycentric s).
inline void sweep_triangle(Front& f, const detail::Triangle& tri, double t0, double dt,
                           std::vector<std::size_t>& covered) {
  const Grid2& g = f.grid;
  const Vec2 a = tri.p[0];
  const Vec2 b = tri.p[1];
  const Vec2 c = tri.p[2];
  const double area = cross(b - a, c - a);
  if (std::abs(area) < 1e-14 * g.h * g.h) return;
  const double xmin = std::min({a.x, b.x, c.x});
  const double xmax = std::max({a.x, b.x, c.x});
  const double ymin = std::min({a.y, b.y, c.y});
  const double ymax = std::max({a.y, b.y, c.y});
  const int i0 = static_cast<int>(std::ceil((xmin - g.origin.x) / g.h - 0.5));
  const int i1 = static_cast<int>(std::floor((xmax - g.origin.x) / g.h - 0.5));
  const int j0 = static_cast<int>(std::ceil((ymin - g.origin.y) / g.h - 0.5));
  const int j1 = static_cast<int>(std::floor((ymax - g.origin.y) / g.h - 0.5));
  const double tol = 1e-9;
  for (int j = j0; j <= j1; ++j) {
    if (!g.periodic_y && (j < 0 || j >= g.ny)) continue;
    for (int i = std::max(i0, 0); i <= std::min(i1, g.nx - 1); ++i) {
      const Vec2 p = g.center(i, j);
      const double l1 = cross(p - a, c - a) / area;
      const double l2 = cross(b - a, p - a) / area;
      const double l0 = 1.0 - l1 - l2;
      if (l0 < -tol || l1 < -tol || l2 < -tol) continue;
      const std::size_t k = g.index(i, g.periodic_y ? g.wrap_j(j) : j);
      if (!is_unreached(f.w.values[k])) continue;
      const double s = std::clamp(l0 * tri.s[0] + l1 * tri.s[1] + l2 * tri.s[2], 0.0, 1.0);
      f.w.values[k] = t0 + s * dt;
      f.volumetric += (1.0 + f.u(g.center(k))) * g.h * g.h;
      covered.push_back(k);
    }
  }
}

namespace detail {

//! Covers 1-2 cell slivers left between fronts that met, near the given cells.
inline void fill_gaps(Front& f, const std::vector<std::size_t>& seeds, double time,
                      const std::unordered_set<std::size_t>& occupied) {
  const Grid2& g = f.grid;
  auto reached = [&](int i, int j) {
    if (i < 0 || i >= g.nx) return false;
    if (g.periodic_y) j = g.wrap_j(j);
    else if (j < 0 || j >= g.ny) return false;
    return !is_unreached(f.w.values[g.index(i, j)]);
  };
  static constexpr int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::size_t> fill;
    for (std::size_t s : seeds) {
      const int si = static_cast<int>(s % g.nx);
      const int sj = static_cast<int>(s / g.nx);
      for (int dj = -2; dj <= 2; ++dj) {
        for (int di = -2; di <= 2; ++di) {
          const int i = si + di;
          int j = sj + dj;
          if (i < 0 || i >= g.nx) continue;
          if (g.periodic_y) j = g.wrap_j(j);
          else if (j < 0 || j >= g.ny) continue;
          const std::size_t k = g.index(i, j);
          if (!is_unreached(f.w.values[k]) || occupied.count(k)) continue;
          for (const auto& d : dirs) {
            const bool lo = reached(i - d[0], j - d[1]) || reached(i - 2 * d[0], j - 2 * d[1]);
            const bool hi = reached(i + d[0], j + d[1]) || reached(i + 2 * d[0], j + 2 * d[1]);
            if (lo && hi) {
              fill.push_back(k);
              break;
            }
          }
        }
      }
    }
    if (fill.empty()) break;
    for (std::size_t k : fill) {
      if (!is_unreached(f.w.values[k])) continue;
      f.w.values[k] = time;
      f.volumetric += (1.0 + f.u(g.center(k))) * g.h * g.h;
    }
  }
}

}  // namespace detail

//! One explicit step of the Lagrangian front law.
inline void step_front(Front& f, double dt) {
  const Grid2& g = f.grid;
  const double t0 = f.t;
  const double b_start = f.boundary_energy();

  // Removals decided on the current configuration.
  std::vector<std::vector<char>> removed(f.chains.size());
  std::vector<std::size_t> collision_cells;
  double arrested_energy = 0.0;
  bool any_event = false;
  {
    const double b0 = b_start;
    for (auto& c : f.chains) {
      for (auto& mk : c.m) {
        if (mk.alive && mk.v <= f.v_floor) {
          mk.alive = false;
          mk.arrest_time = t0;
          mk.v = 0.0;
          f.kills.push_back({mk.pos, mk.v, t0, KillReason::arrest});
          if (std::isinf(f.ledger.first_arrest)) f.ledger.first_arrest = t0;
        }
      }
    }
    arrested_energy = b0 - f.boundary_energy();
  }
  for (std::size_t ci = 0; ci < f.chains.size(); ++ci) {
    auto& c = f.chains[ci];
    removed[ci].assign(c.size(), 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Marker& mk = c.m[i];
      if (!mk.alive) continue;
      const Vec2 q = mk.pos + (f.opt.lookahead * g.h) * mk.normal;
      const auto cell = g.cell_of(q);
      if (!cell) {
        removed[ci][i] = 2;
        f.kills.push_back({mk.pos, mk.v, t0, KillReason::exit});
      } else if (f.w.values[*cell] <= t0) {
        removed[ci][i] = 1;
        collision_cells.push_back(*cell);
        f.kills.push_back({mk.pos, mk.v, t0, KillReason::collision});
      }
    }
  }
  {
    // Segments touching a removed marker disappear with both halves of their weight.
    double drop_exit = 0.0;
    double drop_coll = 0.0;
    bool any = false;
    for (std::size_t ci = 0; ci < f.chains.size(); ++ci) {
      const auto& c = f.chains[ci];
      const auto& rm = removed[ci];
      const std::size_t n = c.size();
      for (std::size_t i = 0; i < c.segments(); ++i) {
        const std::size_t j = (i + 1) % n;
        if (!rm[i] && !rm[j]) continue;
        any = true;
        const double len = norm(c.seg_end(i) - c.m[i].pos);
        const double e = 0.5 * len * ((c.m[i].alive ? c.m[i].v + f.gamma : 0.0) + (c.m[j].alive ? c.m[j].v + f.gamma : 0.0));
        if (rm[i] == 2 || rm[j] == 2) drop_exit += e;
        else drop_coll += e;
      }
    }
    if (any) {
      detail::remove_markers(f, removed);
      f.outflow += drop_exit;
      f.locked += drop_coll;
      any_event = true;
    }
  }
  // Tiny closed loops vanish.
  {
    const double before = f.boundary_energy();
    std::vector<Chain> keep;
    bool any = false;
    for (auto& c : f.chains) {
      std::size_t alive = 0;
      for (const auto& mk : c.m) alive += mk.alive;
      if (c.closed && c.size() <= 3 && c.length() < 3.0 * g.h) {
        for (const auto& mk : c.m) f.kills.push_back({mk.pos, mk.v, t0, KillReason::collapse});
        any = any || alive > 0;
        continue;
      }
      if (c.size() < 2) continue;
      keep.push_back(std::move(c));
    }
    f.chains = std::move(keep);
    const double drop = before - f.boundary_energy();
    f.locked += drop;
    if (any) any_event = true;
  }
  f.locked += arrested_energy;
  if (any_event && std::isinf(f.ledger.first_event)) f.ledger.first_event = t0;
  for (auto& c : f.chains) detail::update_geometry(c);

  // Advance. Each marker's share (V + gamma) * weight loses (1 + u) V weight dt
  // and is spread over its new weight. A trial move with the current speed
  // predicts the new speed; the markers then move with the predicted speed.
  std::vector<std::size_t> covered;
  std::unordered_set<std::size_t> occupied;
  for (auto& c : f.chains) {
    const std::size_t nm = c.size();
    std::vector<Vec2> old(nm);
    std::vector<char> moved(nm, 0);
    std::vector<double> ku(nm, 0.0);
    std::vector<double> share(nm, 0.0);
    const std::vector<double> w_old = detail::marker_weights(c);
    for (std::size_t i = 0; i < nm; ++i) {
      Marker& mk = c.m[i];
      old[i] = mk.pos;
      if (!mk.alive) continue;
      ku[i] = 1.0 + f.u_at(mk.pos);
      share[i] = (mk.v + f.gamma - mk.v * -std::expm1(-ku[i] * dt)) * w_old[i];
      moved[i] = 1;
    }
    auto move = [&](const std::vector<double>& speed, bool decayed) {
      for (std::size_t i = 0; i < nm; ++i) {
        if (!moved[i]) continue;
        const double k = ku[i];
        double s;
        if (std::abs(k * dt) < 1e-8) s = speed[i] * dt * (1.0 + (decayed ? 0.5 : -0.5) * k * dt);
        else s = decayed ? speed[i] * std::expm1(k * dt) / k : -speed[i] * std::expm1(-k * dt) / k;
        c.m[i].pos = old[i] + s * c.m[i].normal;
      }
    };
    auto respeed = [&]() {
      const std::vector<double> w_new = detail::marker_weights(c);
      std::vector<double> v(nm, 0.0);
      for (std::size_t i = 0; i < nm; ++i)
        if (moved[i]) v[i] = w_new[i] > 0.0 ? std::max(0.0, share[i] / w_new[i] - f.gamma) : c.m[i].v;
      return v;
    };
    std::vector<double> v_now(nm);
    for (std::size_t i = 0; i < nm; ++i) v_now[i] = c.m[i].v;
    move(v_now, false);
    const std::vector<double> v_pred = respeed();
    move(v_pred, true);
    const std::vector<double> v_new = respeed();
    for (std::size_t i = 0; i < nm; ++i)
      if (moved[i]) c.m[i].v = v_new[i];
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < c.segments(); ++i) {
      const std::size_t j = (i + 1) % n;
      if (!moved[i] && !moved[j]) continue;
      const Vec2 off = (j == 0) ? c.wrap : Vec2{};
      const Vec2 a0 = old[i];
      const Vec2 b0 = old[j] + off;
      const Vec2 a1 = c.m[i].pos;
      const Vec2 b1 = c.m[j].pos + off;
      sweep_triangle(f, {{a0, b0, b1}, {0.0, 0.0, 1.0}}, t0, dt, covered);
      sweep_triangle(f, {{a0, b1, a1}, {0.0, 1.0, 1.0}}, t0, dt, covered);
    }
    for (const auto& mk : c.m)
      if (mk.alive)
        if (auto cell = g.cell_of(mk.pos)) occupied.insert(*cell);
  }
  f.t = t0 + dt;
  if (!collision_cells.empty()) detail::fill_gaps(f, collision_cells, f.t, occupied);
  for (auto& c : f.chains) {
    // Keep positions inside the primary period so chains do not drift off.
    if (g.periodic_y && !c.m.empty()) {
      const Vec2 shift = g.wrap(c.m[0].pos) - c.m[0].pos;
      if (shift.y != 0.0)
        for (auto& mk : c.m) mk.pos += shift;
    }
    detail::resample_chain(c, f);
    detail::update_geometry(c);
  }
  ++f.steps;
  f.record();
}

//! Fills isolated unreached cells enclosed by reached ones.
inline void fill_holes(Front& f) {
  const Grid2& g = f.grid;
  std::vector<std::size_t> fill;
  std::vector<double> value;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!is_unreached(f.w.values[k])) continue;
      double m = 0.0;
      bool enclosed = true;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int ii = i + di;
        int jj = j + dj;
        if (ii < 0 || ii >= g.nx || (!g.periodic_y && (jj < 0 || jj >= g.ny))) {
          enclosed = false;
          break;
        }
        jj = g.wrap_j(jj);
        const double v = f.w.values[g.index(ii, jj)];
        if (is_unreached(v)) {
          enclosed = false;
          break;
        }
        m = std::max(m, v);
      }
      if (enclosed) {
        fill.push_back(k);
        value.push_back(m);
      }
    }
  }
  for (std::size_t n = 0; n < fill.size(); ++n) {
    f.w.values[fill[n]] = value[n];
    f.volumetric += (1.0 + f.u(g.center(fill[n]))) * g.h * g.h;
  }
}

//! Signed distance to the final front (negative in {w < inf}), clamped to 2h.
inline std::vector<double> front_distance_band(const Front& f) {
  const Grid2& g = f.grid;
  const double band = 2.0 * g.h;
  std::vector<double> d(g.size(), band);
  auto visit = [&](Vec2 a, Vec2 b) {
    const int i0 = static_cast<int>(std::floor((std::min(a.x, b.x) - band - g.origin.x) / g.h));
    const int i1 = static_cast<int>(std::ceil((std::max(a.x, b.x) + band - g.origin.x) / g.h));
    const int j0 = static_cast<int>(std::floor((std::min(a.y, b.y) - band - g.origin.y) / g.h));
    const int j1 = static_cast<int>(std::ceil((std::max(a.y, b.y) + band - g.origin.y) / g.h));
    for (int j = j0; j <= j1; ++j) {
      if (!g.periodic_y && (j < 0 || j >= g.ny)) continue;
      for (int i = std::max(i0, 0); i <= std::min(i1, g.nx - 1); ++i) {
        const std::size_t k = g.index(i, g.periodic_y ? g.wrap_j(j) : j);
        d[k] = std::min(d[k], segment_distance(g.center(i, j), a, b));
      }
    }
  };
  for (const auto& c : f.chains)
    for (std::size_t i = 0; i < c.segments(); ++i) visit(c.m[i].pos, c.seg_end(i));
  for (std::size_t k = 0; k < g.size(); ++k) d[k] = is_unreached(f.w.values[k]) ? std::max(d[k], 1e-9 * g.h) : -d[k];
  return d;
}

struct FrontRun {
  ArrivalField field;
  EnergyLedger ledger;
  std::vector<KillRecord> kills;
  double t_end = 0.0;
  double locked = 0.0;
  double outflow = 0.0;
  std::size_t steps = 0;
  bool all_stopped = false;
};

inline FrontRun finish_run(Front& f, double cap) {
  fill_holes(f);
  f.record();
  FrontRun r;
  r.field.w = f.w;
  r.field.cap = cap;
  r.field.front_distance = front_distance_band(f);
  r.ledger = f.ledger;
  r.kills = f.kills;
  r.t_end = f.t;
  r.locked = f.locked;
  r.outflow = f.outflow;
  r.steps = f.steps;
  r.all_stopped = f.alive_count() == 0;
  return r;
}

//! Runs the front until every marker has stopped or the cap is reached.
inline FrontRun run_front(Front& f, double cap = kUnreached) {
  while (f.alive_count() > 0 && f.t < cap && f.steps < f.opt.max_steps) {
    double dt = stable_dt(f);
    if (f.t + dt > cap) dt = cap - f.t;
    if (!(dt > 0.0)) break;
    step_front(f, dt);
  }
  return finish_run(f, cap);
}

inline FrontRun run_front(const ScenarioSpec& spec, const Grid2& grid, double eps, const FrontOptions& opt = {}) {
  Front f = initialize_front(spec, grid, eps, opt);
  return run_front(f, spec.cap.value_or(kUnreached));
}

}  // namespace cascade
