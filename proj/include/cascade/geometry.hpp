#pragma once

#include <cmath>
#include <limits>

namespace cascade {

//! Value stored in cells that were never reached.
inline constexpr double kUnreached = std::numeric_limits<double>::infinity();

inline bool is_unreached(double v) { return v == kUnreached; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

//! Normal pointing to the right of the direction `t` (solid is kept on the left).
inline Vec2 right_normal(Vec2 t) { return {t.y, -t.x}; }

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
  return norm(p - (a + s * ab));
}

//! Signed curvature of the circle through three points; positive when the
//! path a -> b -> c turns left.
inline double menger_curvature(Vec2 a, Vec2 b, Vec2 c) {
  const double l1 = norm(b - a);
  const double l2 = norm(c - b);
  const double l3 = norm(c - a);
  const double denom = l1 * l2 * l3;
  if (denom <= 0.0) return 0.0;
  return 2.0 * cross(b - a, c - b) / denom;
}

}  // namespace cascade
