#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "cascade/arrival.hpp"
#include "cascade/domain.hpp"
#include "cascade/eikonal.hpp"

namespace cascade {

enum class PathEnd { cap, frontier, ridge, exit, stalled };

//! One member of the particle ensemble. Paths are traced upward in w from the
//! point where the particle reaches the solid, i.e. in reversed time.
struct EnsemblePath {
  Vec2 boundary_point;  // y_theta (or the interior death point for (1+u)^- births)
  Vec2 origin;          // y_0, where the particle is born
  double mass = 0.0;    // Q-weight at the solid end
  double origin_mass = 0.0;
  double origin_w = 0.0;
  double theta = 0.0;   // arclength between y_0 and y_theta
  bool reaches_solid = true;
  PathEnd end = PathEnd::cap;
};

struct WeightedPoint {
  Vec2 pos;
  double mass = 0.0;
  double w = 0.0;
};

struct EquilibriumOptions {
  int paths = 10000;
  std::uint64_t seed = 0;
  double cap = kUnreached;
  //! Exact cost field; when absent L is taken as |grad w| on the liquid side.
  std::optional<CostField> cost;
  //! Number of traced polylines kept for inspection.
  std::size_t keep_polylines = 0;
};

struct EquilibriumState {
  double kappa = 1.0;
  double gamma = 1.0;
  double eps = 0.0;
  double cap = kUnreached;
  Grid2 grid;
  ScalarField2 w;  // w ∧ T, unreached cells stay unreached
  CostField L;
  ScalarField2 q;
  UField u;
  std::vector<EnsemblePath> ensemble;
  //! Birth measure mu (per cell, from the (1+u)^+ density) plus atoms where paths end.
  std::vector<double> mu_cells;
  std::vector<WeightedPoint> mu_atoms;
  //! Death measure nu away from the solid (per cell, (1+u)^- density).
  std::vector<double> nu_cells;
  //! Boundary arrivals pi = kappa Q(y_theta in dx, beta = theta), one point per path.
  std::vector<WeightedPoint> arrivals;
  std::vector<ContourSegment> boundary;
  std::vector<std::uint8_t> liquid;    // swept cells outside the solid
  std::vector<std::uint8_t> endpoint;  // cells holding path origins or interior deaths
  std::vector<std::vector<Vec2>> polylines;
  double trapped_mass = 0.0;
};

namespace detail {

//! Adds the length of segment a-b inside each lattice cell.
template <class F>
void segment_cells(const Grid2& g, Vec2 a, Vec2 b, F&& add) {
  const double len = norm(b - a);
  if (len <= 0.0) return;
  double ts[16];
  int n = 0;
  ts[n++] = 0.0;
  ts[n++] = 1.0;
  auto lines = [&](double p0, double p1, double o) {
    const double lo = std::min(p0, p1);
    const double hi = std::max(p0, p1);
    for (double k = std::ceil((lo - o) / g.h); o + k * g.h < hi && n < 16; k += 1.0) {
      const double t = (o + k * g.h - p0) / (p1 - p0);
      if (t > 0.0 && t < 1.0) ts[n++] = t;
    }
  };
  lines(a.x, b.x, g.origin.x);
  lines(a.y, b.y, g.origin.y);
  std::sort(ts, ts + n);
  for (int k = 0; k + 1 < n; ++k) {
    const double dt = ts[k + 1] - ts[k];
    if (dt <= 0.0) continue;
    const Vec2 mid = a + (0.5 * (ts[k] + ts[k + 1])) * (b - a);
    if (auto cell = g.cell_of(mid)) add(*cell, dt * len);
  }
}

//! Gradient of w from liquid cells only, copied one ring into the solid so that
//! interpolation next to the boundary does not see the kink of w.
inline std::vector<Vec2> liquid_gradient(const ScalarField2& w, const std::vector<std::uint8_t>& solid) {
  const Grid2& g = w.grid;
  ScalarField2 lw = w;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (solid[k]) lw.values[k] = kUnreached;
  auto grad = gradient_field(lw);
  const auto base = grad;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!solid[k]) continue;
      Vec2 s;
      int n = 0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int ii = i + di;
          int jj = j + dj;
          if (ii < 0 || ii >= g.nx) continue;
          if (g.periodic_y) jj = g.wrap_j(jj);
          else if (jj < 0 || jj >= g.ny) continue;
          const std::size_t m = g.index(ii, jj);
          if (solid[m] || is_unreached(w.values[m])) continue;
          s += base[m];
          ++n;
        }
      grad[k] = n > 0 ? (1.0 / n) * s : Vec2{};
    }
  }
  return grad;
}

}  // namespace detail

//! Steepest ascent of w from `start`, RK2 with step h. Calls seg(a, b) per step.
template <class Seg>
PathEnd ascend(const ScalarField2& w, const std::vector<Vec2>& grad, Vec2 start, double cap, Seg&& seg,
               Vec2* end_point = nullptr, double* end_w = nullptr, double* length = nullptr) {
  const Grid2& g = w.grid;
  const double step = g.h;
  const std::size_t budget = 4 * static_cast<std::size_t>(g.nx + g.ny) + 16;
  // w and grad w at x from one stencil; w falls back to the nearest reached corner.
  auto eval = [&](Vec2 x, double& wv, Vec2& gv) {
    const Bilinear b = bilinear_stencil(g, x);
    wv = kUnreached;
    gv = {};
    if (!b.valid) return;
    double s = 0.0;
    double wsum = 0.0;
    double best_w = -1.0;
    double best_v = kUnreached;
    for (int c = 0; c < 4; ++c) {
      gv += b.wt[c] * grad[b.k[c]];
      const double v = w.values[b.k[c]];
      if (is_unreached(v)) continue;
      s += b.wt[c] * v;
      wsum += b.wt[c];
      if (b.wt[c] > best_w) {
        best_w = b.wt[c];
        best_v = v;
      }
    }
    if (wsum > 0.0) wv = wsum < 1.0 - 1e-12 ? best_v : s;
  };
  auto unit = [&](Vec2 gv, double wv, Vec2& d) {
    const double n = norm(gv);
    if (n * g.h < 1e-12 * std::max(1.0, std::abs(wv))) return false;
    d = (1.0 / n) * gv;
    return true;
  };
  Vec2 p = start;
  double wp;
  Vec2 gp;
  eval(p, wp, gp);
  double total = 0.0;
  PathEnd why = PathEnd::stalled;
  for (std::size_t it = 0; it < budget; ++it) {
    if (wp >= cap) {
      why = PathEnd::cap;
      break;
    }
    Vec2 d1, d2;
    if (!unit(gp, wp, d1)) {
      why = PathEnd::ridge;
      break;
    }
    double wm;
    Vec2 gm;
    eval(p + (0.5 * step) * d1, wm, gm);
    if (!unit(gm, wm, d2)) d2 = d1;
    Vec2 q = p + step * d2;
    const auto cell = g.cell_of(q);
    if (!cell) {
      why = PathEnd::exit;
      break;
    }
    if (is_unreached(w.values[*cell])) {
      why = PathEnd::frontier;
      break;
    }
    double wq;
    Vec2 gq;
    eval(q, wq, gq);
    if (!(wq > wp)) {
      why = PathEnd::ridge;
      break;
    }
    if (wq >= cap) {
      const double f = (cap - wp) / (wq - wp);
      q = p + f * (q - p);
      wq = cap;
    }
    seg(p, q);
    total += norm(q - p);
    p = q;
    wp = wq;
    gp = gq;
  }
  if (end_point) *end_point = p;
  if (end_w) *end_w = wp;
  if (length) *length = total;
  return why;
}

//! Particle ensemble of the solution, following the construction in which
//! particles are born with density (1+u)^+ in the aggregate (plus atoms where
//! excess energy is released) and absorbed at the solid with density gamma + V0.
inline EquilibriumState build_from_solution(const ArrivalField& field, const ScenarioSpec& spec, double eps,
                                            const EquilibriumOptions& opt = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("open constraint: eps must be positive");
  if (opt.paths < 1) throw std::invalid_argument("paths must be positive");
  const Grid2& g = field.grid();
  const double h2 = g.h * g.h;
  EquilibriumState st;
  st.grid = g;
  st.gamma = spec.gamma;
  st.eps = eps;
  st.cap = std::min(opt.cap, field.cap);
  st.u = spec.u;
  st.w = field.w;
  for (double& v : st.w.values)
    if (!is_unreached(v)) v = std::min(v, st.cap);
  const RegionMask solid = rasterize(spec.initial, g);
  st.boundary = mask_contour(solid);
  st.liquid.assign(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k)
    st.liquid[k] = !solid.inside[k] && !is_unreached(field.w.values[k]) && field.w.values[k] <= st.cap;

  // Cost: exact when supplied, else |grad w| where the particle system lives.
  const auto grad = detail::liquid_gradient(st.w, solid.inside);
  if (opt.cost) {
    st.L = *opt.cost;
  } else {
    st.L.L = ScalarField2(g, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) st.L.L.values[k] = solid.inside[k] ? 0.0 : norm(grad[k]);
  }
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!solid.inside[k] && !st.liquid[k]) st.L.L.values[k] = -1.0 / spec.gamma;

  // Weights of the absorption points: boundary segments and (1+u)^- cells.
  struct Source {
    double cum;
    std::size_t index;
    bool boundary;
  };
  std::vector<Source> sources;
  double total = 0.0;
  for (std::size_t s = 0; s < st.boundary.size(); ++s) {
    const auto& seg = st.boundary[s];
    const double len = norm(seg.b - seg.a);
    if (len <= 0.0) continue;
    total += (spec.gamma + spec.v0(g.wrap(0.5 * (seg.a + seg.b))) + eps) * len;
    sources.push_back({total, s, true});
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!st.liquid[k]) continue;
    const double neg = std::max(0.0, -(1.0 + spec.u(g.center(k))));
    if (neg <= 0.0) continue;
    total += neg * h2;
    sources.push_back({total, k, false});
  }
  if (!(total > 0.0)) throw std::invalid_argument("no boundary inside the grid");
  st.kappa = total;

  const std::size_t n = static_cast<std::size_t>(opt.paths);
  std::mt19937_64 rng(opt.seed);
  const double offset = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double mass = 1.0 / static_cast<double>(n);
  st.ensemble.resize(n);
  st.nu_cells.assign(g.size(), 0.0);
  st.endpoint.assign(g.size(), 0);
  std::size_t src = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double x = (static_cast<double>(p) + offset) / static_cast<double>(n) * total;
    while (src + 1 < sources.size() && sources[src].cum <= x) ++src;
    const Source& s = sources[src];
    const double prev = src > 0 ? sources[src - 1].cum : 0.0;
    const double frac = s.cum > prev ? std::clamp((x - prev) / (s.cum - prev), 0.0, 1.0) : 0.5;
    EnsemblePath& path = st.ensemble[p];
    path.mass = mass;
    if (s.boundary) {
      const auto& seg = st.boundary[s.index];
      path.boundary_point = seg.a + frac * (seg.b - seg.a);
      st.arrivals.push_back({path.boundary_point, mass, 0.0});
    } else {
      path.boundary_point = g.center(s.index);
      path.reaches_solid = false;
      st.nu_cells[s.index] += mass;
      st.endpoint[s.index] = 1;
    }
  }

  // Pass 1 counts cell entries, pass 2 fills them (CSR by cell).
  std::vector<std::uint32_t> count(g.size() + 1, 0);
  for (std::size_t p = 0; p < n; ++p) {
    ascend(st.w, grad, st.ensemble[p].boundary_point, st.cap, [&](Vec2 a, Vec2 b) {
      detail::segment_cells(g, a, b, [&](std::size_t c, double) { ++count[c + 1]; });
    });
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::uint32_t> entry_path(count.back());
  std::vector<float> entry_len(count.back());
  std::vector<std::uint32_t> fill(count.begin(), count.end() - 1);
  for (std::size_t p = 0; p < n; ++p) {
    EnsemblePath& path = st.ensemble[p];
    std::vector<Vec2>* poly = nullptr;
    if (st.polylines.size() < opt.keep_polylines) {
      st.polylines.emplace_back();
      poly = &st.polylines.back();
      poly->push_back(path.boundary_point);
    }
    Vec2 end;
    double end_w = 0.0;
    double len = 0.0;
    path.end = ascend(
        st.w, grad, path.boundary_point, st.cap,
        [&](Vec2 a, Vec2 b) {
          detail::segment_cells(g, a, b, [&](std::size_t c, double l) {
            entry_path[fill[c]] = static_cast<std::uint32_t>(p);
            entry_len[fill[c]] = static_cast<float>(l);
            ++fill[c];
          });
          if (poly) poly->push_back(b);
        },
        &end, &end_w, &len);
    path.origin = end;
    path.origin_w = end_w;
    path.theta = len;
    if (path.end == PathEnd::stalled) st.trapped_mass += path.mass;
    if (auto c = g.cell_of(end)) st.endpoint[*c] = 1;
  }
  if (st.trapped_mass > 0.05) throw std::runtime_error("inconsistent field: trapped characteristics");

  // Thin the ensemble cell by cell in increasing w: particles are born with
  // density (1+u)^+ / kappa along the paths, split in proportion to occupation.
  std::vector<double> running(n, mass);
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (count[c + 1] > count[c]) order.push_back(c);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return st.w.values[a] < st.w.values[b]; });
  st.q = ScalarField2(g, 0.0);
  st.mu_cells.assign(g.size(), 0.0);
  for (std::size_t c : order) {
    double occ = 0.0;
    for (std::uint32_t e = count[c]; e < count[c + 1]; ++e) occ += running[entry_path[e]] * entry_len[e];
    const double demand = st.liquid[c] ? std::max(0.0, 1.0 + spec.u(g.center(c))) * h2 / st.kappa : 0.0;
    const double rate = occ > 0.0 ? demand / occ : 0.0;
    double q = 0.0;
    for (std::uint32_t e = count[c]; e < count[c + 1]; ++e) {
      double& m = running[entry_path[e]];
      const double loss = std::min(m, m * entry_len[e] * rate);
      q += (m - 0.5 * loss) * entry_len[e];
      m -= loss;
      st.mu_cells[c] += loss;
    }
    st.q.values[c] = q / h2;
  }
  for (std::size_t p = 0; p < n; ++p) {
    EnsemblePath& path = st.ensemble[p];
    path.origin_mass = running[p];
    if (running[p] > 0.0) st.mu_atoms.push_back({path.origin, running[p], path.origin_w});
  }
  return st;
}

//! Cells where the fixed-point identity is tested: interior of the swept region,
//! away from path ends, with q above gamma / kappa + delta.
inline std::vector<std::size_t> residual_cells(const EquilibriumState& st) {
  const Grid2& g = st.grid;
  const double delta = 0.05 * st.gamma / st.kappa;
  std::vector<std::size_t> out;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i + 1 < g.nx; ++i) {
      if (!g.periodic_y && (j == 0 || j + 1 == g.ny)) continue;
      const std::size_t k = g.index(i, j);
      if (!(st.q.values[k] > st.gamma / st.kappa + delta)) continue;
      bool ok = true;
      for (int dj = -1; dj <= 1 && ok; ++dj)
        for (int di = -1; di <= 1 && ok; ++di) {
          const std::size_t n = g.index(i + di, g.wrap_j(j + dj));
          if (!st.liquid[n] || st.endpoint[n] || st.q.values[n] <= 0.0) ok = false;
        }
      if (ok) out.push_back(k);
    }
  }
  return out;
}

//! sup |L - 1/(kappa q - gamma)| / (|L| + 1) over the residual cells.
inline double fixed_point_residual(const EquilibriumState& st) {
  double r = 0.0;
  for (std::size_t k : residual_cells(st)) {
    const double L = st.L.L.values[k];
    const double implied = 1.0 / (st.kappa * st.q.values[k] - st.gamma);
    r = std::max(r, std::abs(L - implied) / (std::abs(L) + 1.0));
  }
  return r;
}

struct ExcessMeasure {
  std::vector<double> density;  // per cell: kappa mu - kappa nu - (1 + u) h^2
  std::vector<WeightedPoint> atoms;  // kappa-scaled
  std::vector<double> t;
  std::vector<double> cumulative;
  double total = 0.0;
  double min_density = 0.0;
};

inline ExcessMeasure excess_measure(const EquilibriumState& st, std::size_t ladder = 10) {
  const Grid2& g = st.grid;
  const double h2 = g.h * g.h;
  ExcessMeasure e;
  e.density.assign(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!st.liquid[k]) continue;
    e.density[k] = st.kappa * (st.mu_cells[k] - st.nu_cells[k]) - (1.0 + st.u(g.center(k))) * h2;
    e.min_density = std::min(e.min_density, e.density[k]);
  }
  for (const auto& a : st.mu_atoms) e.atoms.push_back({a.pos, st.kappa * a.mass, a.w});
  double top = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (st.liquid[k]) top = std::max(top, st.w.values[k]);
  for (const auto& a : e.atoms) top = std::max(top, a.w);
  for (std::size_t i = 1; i <= ladder; ++i) {
    const double t = top * static_cast<double>(i) / static_cast<double>(ladder);
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (st.liquid[k] && st.w.values[k] <= t) s += e.density[k];
    for (const auto& a : e.atoms)
      if (a.w <= t) s += a.mass;
    e.t.push_back(t);
    e.cumulative.push_back(s);
  }
  e.total = e.cumulative.empty() ? 0.0 : e.cumulative.back();
  return e;
}

//! Cumulative excess restricted to {w <= t}, counting atoms strictly below t.
inline double excess_before(const ExcessMeasure& e, const EquilibriumState& st, double t) {
  double s = 0.0;
  for (std::size_t k = 0; k < st.grid.size(); ++k)
    if (st.liquid[k] && st.w.values[k] <= t) s += e.density[k];
  for (const auto& a : e.atoms)
    if (a.w < t) s += a.mass;
  return s;
}

struct BoundaryReport {
  double max_deviation = 0.0;
  std::size_t patches = 0;
};

//! Compares kappa * (arrivals per boundary patch) with (gamma + V0 + eps) * length.
//! Consecutive contour segments are grouped so each patch expects `per_patch` paths.
inline BoundaryReport check_boundary_condition(const EquilibriumState& st, const ScenarioSpec& spec, double eps,
                                               double per_patch = 400.0) {
  if (!(eps > 0.0)) throw std::invalid_argument("open constraint: eps must be positive");
  BoundaryReport r;
  const Grid2& g = st.grid;
  const double n = static_cast<double>(st.ensemble.size());
  const double target = per_patch / n * st.kappa;
  // Assign each arrival to the closest boundary segment in contour order.
  std::vector<double> density(st.boundary.size(), 0.0);
  std::vector<double> seg_weight(st.boundary.size(), 0.0);
  for (std::size_t s = 0; s < st.boundary.size(); ++s) {
    const auto& seg = st.boundary[s];
    seg_weight[s] = (spec.gamma + spec.v0(g.wrap(0.5 * (seg.a + seg.b))) + eps) * norm(seg.b - seg.a);
  }
  std::size_t s = 0;
  for (const auto& a : st.arrivals) {
    while (s + 1 < st.boundary.size() && segment_distance(a.pos, st.boundary[s].a, st.boundary[s].b) > 1e-9 * g.h)
      ++s;
    density[s] += st.kappa * a.mass;
  }
  double want = 0.0;
  double got = 0.0;
  auto flush = [&] {
    if (want <= 0.0) return;
    r.max_deviation = std::max(r.max_deviation, std::abs(got - want) / want);
    ++r.patches;
    want = got = 0.0;
  };
  for (std::size_t k = 0; k < st.boundary.size(); ++k) {
    want += seg_weight[k];
    got += density[k];
    if (want >= target) flush();
  }
  if (want > 0.25 * target || r.patches == 0) flush();
  return r;
}

//! Smooth compactly supported bump; `radius` in the metric of `scale`.
struct Bump {
  Vec2 center;
  double radius = 1.0;
  bool one_dimensional = false;

  double value(Vec2 p) const {
    const double r = one_dimensional ? std::abs(p.x - center.x) / radius : norm(p - center) / radius;
    if (r >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
  }
  Vec2 gradient(Vec2 p) const {
    const Vec2 d = one_dimensional ? Vec2{p.x - center.x, 0.0} : p - center;
    const double r2 = dot(d, d) / (radius * radius);
    if (r2 >= 1.0) return {};
    const double f = std::exp(1.0 - 1.0 / (1.0 - r2));
    const double df_dr2 = -f / ((1.0 - r2) * (1.0 - r2));
    return (2.0 * df_dr2 / (radius * radius)) * d;
  }
};

struct PdeTest {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0; }
};

//! Weak form of the cascade equation against one bump:
//! int grad(phi) . (grad w / |grad w|^2 + gamma grad w / |grad w|) vs kappa int phi d(mu - nu).
inline PdeTest pde_residual(const EquilibriumState& st, const Bump& phi) {
  const Grid2& g = st.grid;
  const double h2 = g.h * g.h;
  const auto grad = gradient_field(st.w);
  PdeTest t;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!st.liquid[k]) continue;
    const Vec2 c = g.center(k);
    const double v = phi.value(c);
    const Vec2 dphi = phi.gradient(c);
    const double gn = norm(grad[k]);
    if (gn > 0.0 && (dphi.x != 0.0 || dphi.y != 0.0)) {
      const Vec2 flux = (1.0 / (gn * gn) + st.gamma / gn) * grad[k];
      t.lhs += dot(dphi, flux) * h2;
      t.scale += norm(dphi) * norm(flux) * h2;
    }
    if (v != 0.0) {
      t.rhs += st.kappa * v * (st.mu_cells[k] - st.nu_cells[k]);
      t.scale += st.kappa * std::abs(v) * (st.mu_cells[k] + st.nu_cells[k]);
    }
  }
  return t;
}

//! Random bumps inside the residual cells; 1D bumps on periodic strips.
inline std::vector<Bump> random_bumps(const EquilibriumState& st, std::size_t count, std::uint64_t seed) {
  const Grid2& g = st.grid;
  const auto cells = residual_cells(st);
  std::vector<Bump> out;
  if (cells.empty()) return out;
  std::vector<std::uint8_t> ok(g.size(), 0);
  for (std::size_t k : cells) ok[k] = 1;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::uniform_real_distribution<double> rad(8.0, 40.0);
  const bool strip = g.periodic_y;
  for (std::size_t tries = 0; out.size() < count && tries < 200 * count; ++tries) {
    Bump b;
    b.center = g.center(cells[pick(rng)]);
    b.radius = rad(rng) * g.h;
    b.one_dimensional = strip;
    // The support must stay inside the residual cells.
    const int r = static_cast<int>(std::ceil(b.radius / g.h)) + 1;
    const int ci = static_cast<int>((b.center.x - g.origin.x) / g.h);
    const int cj = static_cast<int>((b.center.y - g.origin.y) / g.h);
    bool inside = true;
    for (int dj = strip ? 0 : -r; dj <= (strip ? 0 : r) && inside; ++dj)
      for (int di = -r; di <= r && inside; ++di) {
        const int i = ci + di;
        int j = cj + dj;
        if (i < 0 || i >= g.nx) {
          inside = false;
          break;
        }
        if (g.periodic_y) j = g.wrap_j(j);
        else if (j < 0 || j >= g.ny) {
          inside = false;
          break;
        }
        if (b.value(g.center(i, j)) > 0.0 && !ok[g.index(i, j)]) inside = false;
      }
    if (inside) out.push_back(b);
  }
  return out;
}

}  // namespace cascade
