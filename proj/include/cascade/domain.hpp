#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cascade/geometry.hpp"
#include "cascade/profile.hpp"

namespace cascade {

//! Uniform cell-centred lattice. Cell (i, j) has centre origin + ((i+0.5)h, (j+0.5)h).
struct Grid2 {
  Vec2 origin;
  double h = 1.0;
  int nx = 2;
  int ny = 2;
  //! Wraps in y with period ny*h (strip embeddings of 1D problems).
  bool periodic_y = false;

  void validate() const {
    if (!(h > 0.0) || nx < 2 || ny < 2) throw std::invalid_argument("grid needs h > 0 and nx, ny >= 2");
  }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  double width() const { return nx * h; }
  double height() const { return ny * h; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  int wrap_j(int j) const { return ((j % ny) + ny) % ny; }
  Vec2 center(int i, int j) const { return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h}; }
  Vec2 center(std::size_t k) const {
    return center(static_cast<int>(k % nx), static_cast<int>(k / nx));
  }

  //! Maps a point into the primary period (no-op unless periodic).
  Vec2 wrap(Vec2 p) const {
    if (!periodic_y) return p;
    const double ly = height();
    double y = std::fmod(p.y - origin.y, ly);
    if (y < 0.0) y += ly;
    return {p.x, origin.y + y};
  }

  //! Cell containing p, or nullopt when outside the (non-periodic part of the) box.
  std::optional<std::size_t> cell_of(Vec2 p) const {
    const double fx = std::floor((p.x - origin.x) / h);
    const double fy = std::floor((p.y - origin.y) / h);
    if (!(fx >= 0.0 && fx < nx)) return std::nullopt;
    int j;
    if (periodic_y) {
      if (!std::isfinite(fy)) return std::nullopt;
      j = wrap_j(static_cast<int>(std::fmod(fy, static_cast<double>(ny))));
    } else {
      if (!(fy >= 0.0 && fy < ny)) return std::nullopt;
      j = static_cast<int>(fy);
    }
    return index(static_cast<int>(fx), j);
  }
};

struct ScalarField2 {
  Grid2 grid;
  std::vector<double> values;

  ScalarField2() = default;
  ScalarField2(const Grid2& g, double fill) : grid(g), values(g.size(), fill) {}

  double& at(int i, int j) { return values[grid.index(i, j)]; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }
  double max_finite() const {
    double m = 0.0;
    for (double v : values)
      if (!is_unreached(v)) m = std::max(m, v);
    return m;
  }
};

//! Boolean lattice used by `lattice_mask` regions.
struct LatticeMask {
  Vec2 origin;
  double h = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> cells;  // row-major, row 0 at the bottom

  bool at(Vec2 p) const {
    const double fx = std::floor((p.x - origin.x) / h);
    const double fy = std::floor((p.y - origin.y) / h);
    if (fx < 0.0 || fy < 0.0 || fx >= nx || fy >= ny) return false;
    return cells[static_cast<std::size_t>(fy) * nx + static_cast<std::size_t>(fx)] != 0;
  }
};

enum class RegionKind { half_line, interval_complement, ball, ball_complement, annulus_complement, lattice_mask };

//! Initial solid region. 1D kinds act on the first coordinate.
struct RegionSpec {
  RegionKind kind = RegionKind::ball;
  double left = 0.0;   // half_line endpoint / interval_complement left end
  double right = 1.0;  // interval_complement right end
  Vec2 center;
  double radius = 1.0;  // ball, ball_complement; inner radius of annulus_complement
  double outer = 2.0;   // annulus_complement outer radius
  LatticeMask lattice;

  void validate() const {
    switch (kind) {
      case RegionKind::interval_complement:
        if (!(right > left)) throw std::invalid_argument("interval endpoints must be ordered");
        break;
      case RegionKind::ball:
      case RegionKind::ball_complement:
        if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
        break;
      case RegionKind::annulus_complement:
        if (!(radius > 0.0) || !(outer > radius)) throw std::invalid_argument("annulus radii must satisfy 0 < inner < outer");
        break;
      case RegionKind::lattice_mask:
        if (lattice.nx <= 0 || lattice.ny <= 0 || lattice.cells.size() != static_cast<std::size_t>(lattice.nx) * lattice.ny || !(lattice.h > 0.0))
          throw std::invalid_argument("malformed lattice mask");
        break;
      case RegionKind::half_line:
        break;
    }
  }

  bool is_analytic() const { return kind != RegionKind::lattice_mask; }
  bool is_one_dimensional() const {
    return kind == RegionKind::half_line || kind == RegionKind::interval_complement;
  }
  bool is_radial() const {
    return kind == RegionKind::ball || kind == RegionKind::ball_complement;
  }

  //! Signed distance (negative inside the solid) for analytic kinds.
  double signed_distance(Vec2 p) const {
    switch (kind) {
      case RegionKind::half_line: return p.x - left;
      case RegionKind::interval_complement: return std::min(p.x - left, right - p.x);
      case RegionKind::ball: return norm(p - center) - radius;
      case RegionKind::ball_complement: return radius - norm(p - center);
      case RegionKind::annulus_complement: {
        const double r = norm(p - center);
        return std::min(r - radius, outer - r);
      }
      case RegionKind::lattice_mask: return lattice.at(p) ? -0.5 * lattice.h : 0.5 * lattice.h;
    }
    return 0.0;
  }

  bool contains(Vec2 p) const {
    if (kind == RegionKind::lattice_mask) return lattice.at(p);
    return signed_distance(p) <= 0.0;
  }

  //! Newton projection onto the analytic boundary.
  Vec2 project(Vec2 p) const {
    if (!is_analytic()) return p;
    for (int it = 0; it < 3; ++it) {
      const double d = signed_distance(p);
      const double e = 1e-7 * (1.0 + norm(p));
      Vec2 g{(signed_distance({p.x + e, p.y}) - signed_distance({p.x - e, p.y})) / (2 * e),
             (signed_distance({p.x, p.y + e}) - signed_distance({p.x, p.y - e})) / (2 * e)};
      const double g2 = dot(g, g);
      if (g2 < 1e-12) break;
      p -= (d / g2) * g;
    }
    return p;
  }
};

enum class UKind { constant, piecewise1d, radial_piecewise, lattice };

//! Supercooling field u.
struct UField {
  UKind kind = UKind::constant;
  double value = 0.0;
  Profile1D profile;  // along x (piecewise1d) or radius (radial_piecewise)
  Vec2 center;
  ScalarField2 lattice;

  static UField constant(double c) {
    UField u;
    u.value = c;
    u.profile = Profile1D(c);
    return u;
  }
  static UField piecewise(Profile1D p) {
    UField u;
    u.kind = UKind::piecewise1d;
    u.profile = std::move(p);
    return u;
  }
  static UField radial(Profile1D p, Vec2 c) {
    UField u;
    u.kind = UKind::radial_piecewise;
    u.profile = std::move(p);
    u.center = c;
    return u;
  }

  double operator()(Vec2 p) const {
    switch (kind) {
      case UKind::constant: return value;
      case UKind::piecewise1d: return profile(p.x);
      case UKind::radial_piecewise: return profile(norm(p - center));
      case UKind::lattice: {
        const auto& g = lattice.grid;
        int i = static_cast<int>(std::floor((p.x - g.origin.x) / g.h));
        int j = static_cast<int>(std::floor((p.y - g.origin.y) / g.h));
        i = std::clamp(i, 0, g.nx - 1);
        j = g.periodic_y ? g.wrap_j(j) : std::clamp(j, 0, g.ny - 1);
        return lattice.at(i, j);
      }
    }
    return 0.0;
  }

  //! One-dimensional profile for the symmetric closed forms.
  const Profile1D& axis_profile() const {
    if (kind == UKind::lattice) throw std::invalid_argument("lattice u has no 1D profile");
    return profile;
  }
};

enum class V0Kind { constant, sides };

//! Initial normal speed on the boundary. `sides` assigns `left` to boundary
//! points with x below `split` and `right` otherwise.
struct V0Field {
  V0Kind kind = V0Kind::constant;
  double value = 0.0;
  double left = 0.0;
  double right = 0.0;
  double split = 0.5;

  double operator()(Vec2 p) const {
    if (kind == V0Kind::constant) return value;
    return p.x < split ? left : right;
  }
  double max_value() const { return kind == V0Kind::constant ? value : std::max(left, right); }
  double min_value() const { return kind == V0Kind::constant ? value : std::min(left, right); }
};

struct GridSpec {
  double xmin = -1.0;
  double xmax = 1.0;
  double ymin = -1.0;
  double ymax = 1.0;
  double h = 0.01;
  bool periodic_y = false;

  Grid2 make() const {
    Grid2 g;
    g.origin = {xmin, ymin};
    g.h = h;
    g.nx = static_cast<int>(std::lround((xmax - xmin) / h));
    g.ny = static_cast<int>(std::lround((ymax - ymin) / h));
    g.periodic_y = periodic_y;
    g.validate();
    return g;
  }
};

//! Source of the cost field for the eikonal solver.
struct CostSpec {
  enum class Kind { closedform, constant } kind = Kind::closedform;
  double value = 1.0;
};

//! Check tolerances; every one of them can be overridden per scenario.
struct Tolerances {
  double energy = 0.02;
  double perimeter = 0.02;
  double tv = 0.05;
  double front_oracle = 0.02;
  double ode_oracle = 1e-6;
  double residual = 0.05;
  double pde = 0.05;
  double boundary = 0.05;
};

struct ScenarioSpec {
  double gamma = 1.0;
  int dimension = 2;
  UField u;
  RegionSpec initial;
  V0Field v0;
  std::optional<double> cap;
  std::vector<double> eps_ladder{1e-3};
  std::optional<GridSpec> grid;
  std::uint64_t seed = 0;
  std::optional<CostSpec> cost;
  Tolerances tolerances;
  int paths = 10000;

  void validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
    if (v0.kind == V0Kind::constant ? !(v0.value >= 0.0) : !(v0.left >= 0.0 && v0.right >= 0.0))
      throw std::invalid_argument("v0 must be nonnegative");
    if (cap && !(*cap >= 0.0)) throw std::invalid_argument("cap must be nonnegative");
    for (double e : eps_ladder)
      if (!(e > 0.0)) throw std::invalid_argument("eps ladder entries must be positive");
    if (paths < 1) throw std::invalid_argument("paths must be positive");
    initial.validate();
  }

  double eps() const { return eps_ladder.empty() ? 0.0 : eps_ladder.back(); }
};

//! Cell mask plus a fractional indicator used for sub-cell contouring.
struct RegionMask {
  Grid2 grid;
  std::vector<std::uint8_t> inside;
  std::vector<double> indicator;

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
  }
  double area() const { return count() * grid.h * grid.h; }
  bool contains(std::size_t k) const { return inside[k] != 0; }

  static RegionMask from_inside(const Grid2& g, std::vector<std::uint8_t> in) {
    RegionMask m;
    m.grid = g;
    m.indicator.resize(in.size());
    for (std::size_t k = 0; k < in.size(); ++k) m.indicator[k] = in[k] ? 1.0 : 0.0;
    m.inside = std::move(in);
    return m;
  }

  //! Mask from a level function phi (negative inside) with a linear ramp of
  //! half-width 2h, so contours sit on the zero level of phi.
  static RegionMask from_level(const Grid2& g, const std::vector<double>& phi) {
    RegionMask m;
    m.grid = g;
    m.inside.resize(phi.size());
    m.indicator.resize(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) {
      m.inside[k] = phi[k] <= 0.0 ? 1 : 0;
      m.indicator[k] = std::clamp(0.5 - phi[k] / (4.0 * g.h), 0.0, 1.0);
    }
    return m;
  }

  RegionMask complement() const {
    RegionMask m = *this;
    for (std::size_t k = 0; k < inside.size(); ++k) {
      m.inside[k] = inside[k] ? 0 : 1;
      m.indicator[k] = 1.0 - indicator[k];
    }
    return m;
  }
};

inline RegionMask rasterize(const RegionSpec& region, const Grid2& grid) {
  grid.validate();
  std::vector<double> phi(grid.size());
  if (region.is_analytic()) {
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) phi[grid.index(i, j)] = region.signed_distance(grid.center(i, j));
  }
  RegionMask m;
  if (region.is_analytic()) {
    m = RegionMask::from_level(grid, phi);
  } else {
    std::vector<std::uint8_t> in(grid.size());
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) in[grid.index(i, j)] = region.lattice.at(grid.center(i, j)) ? 1 : 0;
    m = RegionMask::from_inside(grid, std::move(in));
  }
  if (m.count() == 0) throw std::invalid_argument("empty rasterization");
  return m;
}

// ---------------------------------------------------------------------------
// Marching squares

struct ContourSegment {
  Vec2 a;
  Vec2 b;
  std::int64_t edge_a = 0;
  std::int64_t edge_b = 0;
};

//! Oriented iso-contour segments of a cell-centred field: cells with value >= iso
//! lie to the left of each segment.
inline std::vector<ContourSegment> contour_segments(const Grid2& g, const std::vector<double>& v, double iso) {
  std::vector<ContourSegment> out;
  const int jcount = g.periodic_y ? g.ny : g.ny - 1;
  auto hedge = [&](int i, int j) { return 2 * static_cast<std::int64_t>(g.index(i, g.wrap_j(j))); };
  auto vedge = [&](int i, int j) { return 2 * static_cast<std::int64_t>(g.index(i, g.wrap_j(j))) + 1; };
  for (int j = 0; j < jcount; ++j) {
    const int j1 = g.wrap_j(j + 1);
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double val[4] = {v[g.index(i, j)], v[g.index(i + 1, j)], v[g.index(i + 1, j1)], v[g.index(i, j1)]};
      const bool in[4] = {val[0] >= iso, val[1] >= iso, val[2] >= iso, val[3] >= iso};
      const int nin = in[0] + in[1] + in[2] + in[3];
      if (nin == 0 || nin == 4) continue;
      const Vec2 pos[4] = {g.center(i, j), g.center(i + 1, j), g.center(i + 1, j + 1), g.center(i, j + 1)};
      const std::int64_t eid[4] = {hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)};
      auto crossing = [&](int k) {
        const int k1 = (k + 1) % 4;
        const double t = (iso - val[k]) / (val[k1] - val[k]);
        return pos[k] + t * (pos[k1] - pos[k]);
      };
      int starts[2];
      int ends[2];
      int ns = 0;
      int ne = 0;
      for (int k = 0; k < 4; ++k) {
        const int k1 = (k + 1) % 4;
        if (in[k] && !in[k1]) starts[ns++] = k;
        if (!in[k] && in[k1]) ends[ne++] = k;
      }
      auto emit = [&](int s, int e) { out.push_back({crossing(s), crossing(e), eid[s], eid[e]}); };
      if (ns == 1) {
        emit(starts[0], ends[0]);
        continue;
      }
      // Saddle: the cell average decides whether the inside corners connect.
      const bool joined = 0.25 * (val[0] + val[1] + val[2] + val[3]) >= iso;
      for (int s = 0; s < 2; ++s) {
        const int k = starts[s];
        int best = -1;
        for (int step = 1; step < 4 && best < 0; ++step) {
          const int cand = joined ? (k + step) % 4 : (k + 4 - step) % 4;
          if (cand == ends[0] || cand == ends[1]) best = cand;
        }
        emit(k, best);
      }
    }
  }
  return out;
}

struct Polyline {
  std::vector<Vec2> pts;
  bool closed = false;
  //! Offset added to pts.front() to close the loop across a periodic boundary.
  Vec2 wrap;

  double length() const {
    double s = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) s += norm(pts[k] - pts[k - 1]);
    if (closed && !pts.empty()) s += norm(pts.front() + wrap - pts.back());
    return s;
  }
};

//! Links oriented segments into polylines (open chains end at the grid edge).
inline std::vector<Polyline> link_segments(const Grid2& g, const std::vector<ContourSegment>& segs) {
  std::unordered_map<std::int64_t, std::size_t> start_at;
  std::unordered_set<std::int64_t> end_edges;
  start_at.reserve(segs.size() * 2);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    start_at[segs[k].edge_a] = k;
    end_edges.insert(segs[k].edge_b);
  }
  const double ly = g.height();
  auto period_shift = [&](Vec2 from, Vec2 to) {
    if (!g.periodic_y) return Vec2{};
    return Vec2{0.0, ly * std::round((to.y - from.y) / ly)};
  };
  std::vector<char> used(segs.size(), 0);
  std::vector<Polyline> out;
  auto follow = [&](std::size_t first, bool open) {
    Polyline pl;
    pl.pts.push_back(segs[first].a);
    Vec2 offset{};
    std::size_t cur = first;
    while (true) {
      used[cur] = 1;
      const Vec2 end = segs[cur].b + offset;
      auto it = start_at.find(segs[cur].edge_b);
      if (it == start_at.end()) {
        pl.pts.push_back(end);
        break;
      }
      const std::size_t nxt = it->second;
      if (!open && nxt == first) {
        pl.closed = true;
        pl.wrap = period_shift(segs[first].a, end);
        break;
      }
      if (used[nxt]) {
        pl.pts.push_back(end);
        break;
      }
      pl.pts.push_back(end);
      offset = period_shift(segs[nxt].a, end);
      cur = nxt;
    }
    out.push_back(std::move(pl));
  };
  for (std::size_t k = 0; k < segs.size(); ++k)
    if (!used[k] && !end_edges.count(segs[k].edge_a)) follow(k, true);
  for (std::size_t k = 0; k < segs.size(); ++k)
    if (!used[k]) follow(k, false);
  return out;
}

inline std::vector<ContourSegment> mask_contour(const RegionMask& m) {
  return contour_segments(m.grid, m.indicator, 0.5);
}

inline double perimeter(const RegionMask& m) {
  double s = 0.0;
  for (const auto& seg : mask_contour(m)) s += norm(seg.b - seg.a);
  return s;
}

template <class F>
double boundary_integral(const RegionMask& m, F&& f) {
  double s = 0.0;
  for (const auto& seg : mask_contour(m)) {
    const double len = norm(seg.b - seg.a);
    if (len > 0.0) s += f(m.grid.wrap(0.5 * (seg.a + seg.b))) * len;
  }
  return s;
}

//! Plain (ASCII) PGM, top row first.
inline void write_pgm(std::ostream& os, const Grid2& g, const std::vector<std::uint8_t>& pixels) {
  os << "P2\n" << g.nx << ' ' << g.ny << "\n255\n";
  for (int j = g.ny - 1; j >= 0; --j) {
    for (int i = 0; i < g.nx; ++i) os << static_cast<int>(pixels[g.index(i, j)]) << (i + 1 < g.nx ? ' ' : '\n');
  }
}

inline void write_pgm(std::ostream& os, const RegionMask& m) {
  std::vector<std::uint8_t> px(m.inside.size());
  for (std::size_t k = 0; k < px.size(); ++k) px[k] = m.inside[k] ? 255 : 0;
  write_pgm(os, m.grid, px);
}

//! Field scaled to 0..255 after capping at `cap`; unreached cells are white.
inline void write_pgm(std::ostream& os, const ScalarField2& f, double cap) {
  std::vector<std::uint8_t> px(f.values.size());
  for (std::size_t k = 0; k < px.size(); ++k) {
    const double v = std::min(f.values[k], cap);
    px[k] = cap > 0.0 ? static_cast<std::uint8_t>(std::lround(255.0 * v / cap)) : 255;
  }
  write_pgm(os, f.grid, px);
}

//! Integral of (1 + u)^- over the cells outside the mask.
inline double negative_part_outside(const UField& u, const RegionMask& gamma) {
  const auto& g = gamma.grid;
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!gamma.inside[k]) s += std::max(0.0, -(1.0 + u(g.center(k))));
  return s * g.h * g.h;
}

}  // namespace cascade
