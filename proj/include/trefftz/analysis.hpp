#pragma once

#include "basis.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace trefftz {

namespace detail {
inline double abs2_of(double x) { return x * x; }
inline double abs2_of(std::complex<double> x) { return std::norm(x); }
} // namespace detail

/// sqrt(sum_K int_K |u_h - u|^2), element dof blocks in mesh order.
template <class S, class Exact>
double l2_error(const std::vector<S> &u_h, Exact &&u_exact, const Mesh &mesh, int p) {
  const int nk = basis_dimension(mesh.dim, p);
  const int qdeg = 2 * p + 2;
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    ElementBasis basis = make_basis(mesh, k, p);
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    for (std::size_t iq = 0; iq < q.size(); ++iq) {
      S uh = S(0);
      for (int j = 0; j < nk; ++j)
        uh += u_h[k * nk + j] * S(eval(basis, j, q.points[iq]));
      total += q.weights[iq] * detail::abs2_of(uh - S(u_exact(q.points[iq])));
    }
  }
  return std::sqrt(total);
}

/// DG norm of the error for the SIP scheme, as the sum
///   sum_K |grad(u_h - u)|_K + sum_F |sqrt(alpha p^2/h) [u_h - u]|_F .
/// Interior jumps of the exact solution vanish; boundary jumps compare
/// against the Dirichlet data.
inline double dg_norm_error(const std::vector<double> &u_h,
                            const std::function<double(Vec2)> &u_exact,
                            const std::function<Vec2(Vec2)> &grad_exact,
                            const Mesh &mesh, int p, double alpha = 4.0) {
  const int nk = basis_dimension(mesh.dim, p);
  const int qdeg = 2 * p + 2;
  const double peff = std::max(p, 1);
  double total = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    ElementBasis basis = make_basis(mesh, k, p);
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    double elem = 0.0;
    for (std::size_t iq = 0; iq < q.size(); ++iq) {
      Vec2 g{0.0, 0.0};
      for (int j = 0; j < nk; ++j) {
        Vec2 gj = eval_grad(basis, j, q.points[iq]);
        g = g + u_h[k * nk + j] * gj;
      }
      Vec2 diff = g - grad_exact(q.points[iq]);
      elem += q.weights[iq] * diff.dot(diff);
    }
    total += std::sqrt(elem);
  }
  for (int fid = 0; fid < mesh.num_facets(); ++fid) {
    const Facet &f = mesh.facets[fid];
    QuadratureRule q = facet_quadrature_for(mesh, fid, qdeg);
    double facet = 0.0;
    if (!f.is_boundary()) {
      int kp = f.adjacent[0], km = f.adjacent[1];
      double hF = 0.5 * (mesh.elements[kp].diameter + mesh.elements[km].diameter);
      double pen = alpha * peff * peff / hF;
      ElementBasis bp = make_basis(mesh, kp, p), bm = make_basis(mesh, km, p);
      for (std::size_t iq = 0; iq < q.size(); ++iq) {
        double jump = 0.0;
        for (int j = 0; j < nk; ++j)
          jump += u_h[kp * nk + j] * eval(bp, j, q.points[iq]) -
                  u_h[km * nk + j] * eval(bm, j, q.points[iq]);
        facet += q.weights[iq] * pen * jump * jump;
      }
    } else {
      int k0 = f.adjacent[0];
      double pen = alpha * peff * peff / mesh.elements[k0].diameter;
      ElementBasis b0 = make_basis(mesh, k0, p);
      for (std::size_t iq = 0; iq < q.size(); ++iq) {
        double jump = -u_exact(q.points[iq]);
        for (int j = 0; j < nk; ++j)
          jump += u_h[k0 * nk + j] * eval(b0, j, q.points[iq]);
        facet += q.weights[iq] * pen * jump * jump;
      }
    }
    total += std::sqrt(facet);
  }
  return total;
}

/// Experimental orders of convergence; undefined rates (zero or negative
/// errors) come back as NaN.
inline std::vector<double> eoc(const std::vector<double> &errors,
                               const std::vector<double> &hs) {
  if (errors.size() != hs.size() || errors.size() < 2)
    throw std::invalid_argument("eoc: need equally long lists with >= 2 entries");
  for (std::size_t i = 1; i < hs.size(); ++i)
    if (!(hs[i] < hs[i - 1]))
      throw std::invalid_argument("eoc: hs must be strictly decreasing");
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] <= 0.0 || errors[i + 1] <= 0.0) {
      rates.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  }
  return rates;
}

enum class OperatorClass { first_order, second_order };

/// Globally coupled unknowns and block-pattern nonzeros for standard DG
/// and the two embedded Trefftz reductions on 2D triangles:
/// TDG(1) has p+1, TDG(2) has 2p+1 local dofs.
struct DofCounts {
  long n_elements = 0;
  long coupled_block_pairs = 0; // ordered pairs: diagonal + 2 per interior facet
  long dg_ndof = 0, tdg1_ndof = 0, tdg2_ndof = 0;
  long dg_nze = 0, tdg1_nze = 0, tdg2_nze = 0;
  long reduced_ndof = 0, reduced_nze = 0; // the column matching the operator class
};

namespace detail {
inline DofCounts dof_counts_from_pairs(long n_elements, long pairs, int p,
                                       OperatorClass op_class) {
  DofCounts c;
  c.n_elements = n_elements;
  c.coupled_block_pairs = pairs;
  long nk = static_cast<long>(p + 1) * (p + 2) / 2;
  long m1 = p + 1, m2 = 2 * p + 1;
  c.dg_ndof = n_elements * nk;
  c.tdg1_ndof = n_elements * m1;
  c.tdg2_ndof = n_elements * std::min(m2, nk); // reduction cannot exceed N_K
  c.dg_nze = pairs * nk * nk;
  c.tdg1_nze = pairs * m1 * m1;
  c.tdg2_nze = pairs * std::min(m2, nk) * std::min(m2, nk);
  c.reduced_ndof = op_class == OperatorClass::first_order ? c.tdg1_ndof : c.tdg2_ndof;
  c.reduced_nze = op_class == OperatorClass::first_order ? c.tdg1_nze : c.tdg2_nze;
  return c;
}
} // namespace detail

/// Counts from an actual mesh (block pairs from the facet graph).
inline DofCounts dof_report(const Mesh &mesh, int p, OperatorClass op_class) {
  if (mesh.dim != 2)
    throw std::invalid_argument("dof_report: 2D meshes only");
  long interior = 0;
  for (const Facet &f : mesh.facets)
    if (!f.is_boundary())
      ++interior;
  long pairs = mesh.num_elements() + 2 * interior;
  return detail::dof_counts_from_pairs(mesh.num_elements(), pairs, p, op_class);
}

/// Closed-form counts for an element count alone, assuming every element
/// couples with d+1 = 3 neighbors (interior facets = 3 nE / 2), the same
/// structural convention the cost tables use.
inline DofCounts dof_report(long n_elements, int p, OperatorClass op_class) {
  long pairs = n_elements + 3 * n_elements;
  return detail::dof_counts_from_pairs(n_elements, pairs, p, op_class);
}

} // namespace trefftz
