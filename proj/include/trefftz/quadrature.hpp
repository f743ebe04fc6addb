#pragma once

#include "mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace trefftz {

/// Quadrature points and weights. Reference rules carry weights summing to
/// the reference measure (1 on [0,1], 1/2 on the unit triangle); rules mapped
/// to a physical element carry physical points and Jacobian-scaled weights.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return points.size(); }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1], exact for degree 2n-1.
/// Newton iteration on the Legendre recurrence.
inline void gauss_legendre_01(int n, std::vector<double> &x, std::vector<double> &w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess on [-1,1]
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15)
        break;
    }
    x[i] = 0.5 * (1.0 + t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

inline int gauss_points_for(int degree) { return degree / 2 + 1; }

} // namespace detail

/// Reference rule on [0,1].
inline QuadratureRule reference_interval_rule(int degree) {
  if (degree < 0)
    throw std::invalid_argument("quadrature: degree must be >= 0");
  int n = detail::gauss_points_for(degree);
  std::vector<double> x, w;
  detail::gauss_legendre_01(n, x, w);
  QuadratureRule q;
  q.exactness_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    q.points.push_back({x[i], 0.0});
    q.weights.push_back(w[i]);
  }
  return q;
}

/// Collapsed tensor Gauss rule on the unit triangle (0,0),(1,0),(0,1):
/// x = u, y = v(1-u) with Jacobian (1-u). Exact for total degree `degree`
/// at any degree, so there is no table limit to fall back from.
inline QuadratureRule reference_triangle_rule(int degree) {
  if (degree < 0)
    throw std::invalid_argument("quadrature: degree must be >= 0");
  int nu = detail::gauss_points_for(degree + 1); // integrand picks up (1-u)
  int nv = detail::gauss_points_for(degree);
  std::vector<double> xu, wu, xv, wv;
  detail::gauss_legendre_01(nu, xu, wu);
  detail::gauss_legendre_01(nv, xv, wv);
  QuadratureRule q;
  q.exactness_degree = degree;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      q.points.push_back({xu[i], xv[j] * (1.0 - xu[i])});
      q.weights.push_back(wu[i] * wv[j] * (1.0 - xu[i]));
    }
  return q;
}

/// Rule mapped to a physical element; weights sum to the element measure.
inline QuadratureRule quadrature_for(const Mesh &mesh, int element_id, int degree) {
  const Element &e = mesh.elements[element_id];
  QuadratureRule q;
  if (mesh.dim == 1) {
    QuadratureRule ref = reference_interval_rule(degree);
    q.exactness_degree = ref.exactness_degree;
    const Vec2 &a = mesh.vertices[e.vertex_ids[0]];
    double len = e.measure;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      q.points.push_back({a.x + len * ref.points[i].x, 0.0});
      q.weights.push_back(len * ref.weights[i]);
    }
  } else {
    QuadratureRule ref = reference_triangle_rule(degree);
    q.exactness_degree = ref.exactness_degree;
    const Vec2 &v0 = mesh.vertices[e.vertex_ids[0]];
    const Vec2 &v1 = mesh.vertices[e.vertex_ids[1]];
    const Vec2 &v2 = mesh.vertices[e.vertex_ids[2]];
    double det = 2.0 * e.measure;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      double r = ref.points[i].x, s = ref.points[i].y;
      q.points.push_back(v0 + r * (v1 - v0) + s * (v2 - v0));
      q.weights.push_back(det * ref.weights[i]);
    }
  }
  return q;
}

/// Rule on a facet; weights sum to the facet measure.
/// Point facets (1D meshes) become a single evaluation with weight 1.
inline QuadratureRule facet_quadrature_for(const Mesh &mesh, int facet_id, int degree) {
  const Facet &f = mesh.facets[facet_id];
  QuadratureRule q;
  if (mesh.dim == 1) {
    q.exactness_degree = degree;
    q.points.push_back(mesh.vertices[f.vertex_ids[0]]);
    q.weights.push_back(1.0);
    return q;
  }
  QuadratureRule ref = reference_interval_rule(degree);
  q.exactness_degree = ref.exactness_degree;
  const Vec2 &a = mesh.vertices[f.vertex_ids[0]];
  const Vec2 &b = mesh.vertices[f.vertex_ids[1]];
  for (std::size_t i = 0; i < ref.size(); ++i) {
    q.points.push_back(a + ref.points[i].x * (b - a));
    q.weights.push_back(f.measure * ref.weights[i]);
  }
  return q;
}

} // namespace trefftz
