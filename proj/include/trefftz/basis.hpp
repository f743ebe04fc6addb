#pragma once

#include "mesh.hpp"

#include <stdexcept>
#include <vector>

namespace trefftz {

/// Scaled monomial basis on one element: function j is
///   prod_k ((x_k - center_k) / scale)^(e_j)_k
/// with exponents ordered by total degree, then lexicographically.
/// Derivatives of any order are exact (power rule), which is what the
/// operator matrices need.
struct ElementBasis {
  int element_id = -1;
  int degree = 0;
  int dim = 2;
  Vec2 center;
  double scale = 1.0;
  std::vector<MultiIndex> exponents;

  int size() const { return static_cast<int>(exponents.size()); }
};

inline int basis_dimension(int dim, int p) {
  return dim == 1 ? p + 1 : (p + 1) * (p + 2) / 2;
}

inline ElementBasis make_basis(const Mesh &mesh, int element_id, int p) {
  if (p < 0)
    throw std::invalid_argument("make_basis: p must be >= 0");
  const Element &e = mesh.elements[element_id];
  ElementBasis b;
  b.element_id = element_id;
  b.degree = p;
  b.dim = mesh.dim;
  b.center = e.centroid;
  b.scale = e.diameter;
  for (int tot = 0; tot <= p; ++tot) {
    if (mesh.dim == 1) {
      b.exponents.push_back({tot, 0});
    } else {
      for (int i1 = 0; i1 <= tot; ++i1)
        b.exponents.push_back({i1, tot - i1});
    }
  }
  return b;
}

namespace detail {

inline double falling_factorial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i)
    r *= n - i;
  return r;
}

inline double int_pow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i)
    r *= x;
  return r;
}

} // namespace detail

/// Exact partial derivative D^d of basis function j at a point.
/// Orders beyond the monomial degree return 0.
inline double eval_deriv(const ElementBasis &b, int j, const MultiIndex &d, const Vec2 &pt) {
  if (j < 0 || j >= b.size())
    throw std::out_of_range("eval_deriv: basis index out of range");
  const MultiIndex &e = b.exponents[j];
  if (d[0] > e[0] || d[1] > e[1])
    return 0.0;
  double cx = detail::falling_factorial(e[0], d[0]);
  double cy = detail::falling_factorial(e[1], d[1]);
  double X = (pt.x - b.center.x) / b.scale;
  double Y = (pt.y - b.center.y) / b.scale;
  return cx * cy * detail::int_pow(X, e[0] - d[0]) * detail::int_pow(Y, e[1] - d[1]) /
         detail::int_pow(b.scale, d[0] + d[1]);
}

inline double eval(const ElementBasis &b, int j, const Vec2 &pt) {
  return eval_deriv(b, j, {0, 0}, pt);
}

inline Vec2 eval_grad(const ElementBasis &b, int j, const Vec2 &pt) {
  return {eval_deriv(b, j, {1, 0}, pt), eval_deriv(b, j, {0, 1}, pt)};
}

} // namespace trefftz
