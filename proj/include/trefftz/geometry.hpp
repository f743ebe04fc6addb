#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace trefftz {

/// Point / vector in the plane. 1D meshes use the x component only.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2 &o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 &o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  double dot(const Vec2 &o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2 &v) { return v * s; }

/// z-component of the cross product, twice the signed area of (0,a,b).
inline double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }

/// Multi-index for partial derivatives and monomial exponents.
/// 1D uses the first component; the second stays 0.
using MultiIndex = std::array<int, 2>;

inline int order(const MultiIndex &d) { return d[0] + d[1]; }

} // namespace trefftz
