#pragma once

#include "basis.hpp"
#include "block_sparse.hpp"
#include "diffop.hpp"
#include "quadrature.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace trefftz {

/// Global DG system A u = l with one dof block per element.
template <class S> struct AssembledSystem {
  BlockSparseMatrix<S> A;
  std::vector<S> l;
  std::vector<int> dof_offset; // element -> first global dof
  int N = 0;
  int p = 0;
  SymmetryHint hint = SymmetryHint::general;
};

/// SIP for -Laplace(u) = f (f = 0 gives the Laplace problem), u = g on
/// the boundary, interior penalty alpha p^2 / h with the mean of the two
/// adjacent element diameters as h.
struct SipProblem {
  std::function<double(Vec2)> dirichlet;       // g
  std::function<double(Vec2)> source;          // f; empty means f = 0
  double penalty = 4.0;                        // alpha
};

/// Helmholtz with impedance-type boundary data entering the right hand
/// side as written in the scheme; test functions are conjugated.
struct HelmholtzProblem {
  double omega = 1.0;
  std::function<std::complex<double>(Vec2, Vec2)> robin; // g(x, outward normal)
  double alpha = 0.5;
  double beta = 0.5;
  double delta = 0.5;
};

/// Upwind DG for b . grad(u) = f with inflow data u_D; b is assumed
/// divergence-free and inflow is classified per quadrature point.
struct AdvectionProblem {
  std::function<double(Vec2)> velocity_x;
  std::function<double(Vec2)> velocity_y;
  std::function<double(Vec2)> source;          // f; empty means f = 0
  std::function<double(Vec2)> inflow;          // u_D
};

namespace detail {

/// Values of all basis functions (and a derivative) tabulated at points:
/// row j holds basis function j.
inline Matrix<double> tabulate(const ElementBasis &b, const std::vector<Vec2> &pts,
                               MultiIndex d = {0, 0}) {
  Matrix<double> t(b.size(), static_cast<int>(pts.size()));
  for (int j = 0; j < b.size(); ++j)
    for (std::size_t q = 0; q < pts.size(); ++q)
      t(j, static_cast<int>(q)) = eval_deriv(b, j, d, pts[q]);
  return t;
}

inline Matrix<double> tabulate_normal_deriv(const ElementBasis &b,
                                            const std::vector<Vec2> &pts, Vec2 n) {
  Matrix<double> t(b.size(), static_cast<int>(pts.size()));
  for (int j = 0; j < b.size(); ++j)
    for (std::size_t q = 0; q < pts.size(); ++q)
      t(j, static_cast<int>(q)) = n.x * eval_deriv(b, j, {1, 0}, pts[q]) +
                                  n.y * eval_deriv(b, j, {0, 1}, pts[q]);
  return t;
}

/// blk[i,j] += sum_q w_q f_q trial(j,q) test(i,q)
template <class S, class W>
void add_outer(Matrix<S> &blk, const std::vector<W> &w, const Matrix<double> &trial,
               const Matrix<double> &test, W scale = W(1)) {
  for (int i = 0; i < test.rows(); ++i)
    for (int j = 0; j < trial.rows(); ++j) {
      W s = W(0);
      for (std::size_t q = 0; q < w.size(); ++q)
        s += w[q] * trial(j, static_cast<int>(q)) * test(i, static_cast<int>(q));
      blk(i, j) += S(scale * s);
    }
}

template <class S>
AssembledSystem<S> make_system(const Mesh &mesh, int p) {
  AssembledSystem<S> sys;
  sys.p = p;
  int nE = mesh.num_elements();
  int nk = basis_dimension(mesh.dim, p);
  auto part = BlockSparseMatrix<S>::uniform_partition(nE, nk);
  sys.A = BlockSparseMatrix<S>(part, part);
  sys.N = nE * nk;
  sys.l.assign(sys.N, S(0));
  sys.dof_offset.resize(nE);
  for (int k = 0; k < nE; ++k)
    sys.dof_offset[k] = k * nk;
  return sys;
}

} // namespace detail

inline AssembledSystem<double> assemble_sip(const Mesh &mesh, int p, const SipProblem &prob) {
  if (!(prob.penalty > 0.0))
    throw std::invalid_argument("assemble_sip: penalty must be > 0");
  AssembledSystem<double> sys = detail::make_system<double>(mesh, p);
  sys.hint = SymmetryHint::spd;
  const int qdeg = 2 * p + 2;
  const double peff = std::max(p, 1); // alpha p^2/h degenerates at p = 0

  std::vector<ElementBasis> bases;
  for (int k = 0; k < mesh.num_elements(); ++k)
    bases.push_back(make_basis(mesh, k, p));

  for (int k = 0; k < mesh.num_elements(); ++k) {
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    Matrix<double> gx = detail::tabulate(bases[k], q.points, {1, 0});
    Matrix<double> gy = detail::tabulate(bases[k], q.points, {0, 1});
    Matrix<double> blk(bases[k].size(), bases[k].size());
    detail::add_outer(blk, q.weights, gx, gx);
    detail::add_outer(blk, q.weights, gy, gy);
    sys.A.add_block(k, k, blk);
    if (prob.source) {
      Matrix<double> ph = detail::tabulate(bases[k], q.points);
      for (int i = 0; i < ph.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j)
          s += q.weights[j] * prob.source(q.points[j]) * ph(i, static_cast<int>(j));
        sys.l[sys.dof_offset[k] + i] += s;
      }
    }
  }

  for (int fid = 0; fid < mesh.num_facets(); ++fid) {
    const Facet &f = mesh.facets[fid];
    QuadratureRule q = facet_quadrature_for(mesh, fid, qdeg);
    Vec2 n = f.unit_normal;
    if (!f.is_boundary()) {
      int kp = f.adjacent[0], km = f.adjacent[1];
      double hF = 0.5 * (mesh.elements[kp].diameter + mesh.elements[km].diameter);
      double pen = prob.penalty * peff * peff / hF;
      Matrix<double> v[2] = {detail::tabulate(bases[kp], q.points),
                             detail::tabulate(bases[km], q.points)};
      Matrix<double> dn[2] = {detail::tabulate_normal_deriv(bases[kp], q.points, n),
                              detail::tabulate_normal_deriv(bases[km], q.points, n)};
      int elem[2] = {kp, km};
      double sgn[2] = {1.0, -1.0};
      for (int a = 0; a < 2; ++a)      // test side
        for (int b = 0; b < 2; ++b) {  // trial side
          Matrix<double> blk(v[a].rows(), v[b].rows());
          // -avg(dn u) jump(v) - jump(u) avg(dn v) + pen jump(u) jump(v)
          detail::add_outer(blk, q.weights, dn[b], v[a], -0.5 * sgn[a]);
          detail::add_outer(blk, q.weights, v[b], dn[a], -0.5 * sgn[b]);
          detail::add_outer(blk, q.weights, v[b], v[a], pen * sgn[a] * sgn[b]);
          sys.A.add_block(elem[a], elem[b], blk);
        }
    } else {
      int k0 = f.adjacent[0];
      double pen = prob.penalty * peff * peff / mesh.elements[k0].diameter;
      Matrix<double> v0 = detail::tabulate(bases[k0], q.points);
      Matrix<double> dn0 = detail::tabulate_normal_deriv(bases[k0], q.points, n);
      Matrix<double> blk(v0.rows(), v0.rows());
      detail::add_outer(blk, q.weights, dn0, v0, -1.0);
      detail::add_outer(blk, q.weights, v0, dn0, -1.0);
      detail::add_outer(blk, q.weights, v0, v0, pen);
      sys.A.add_block(k0, k0, blk);
      for (int i = 0; i < v0.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
          double g = prob.dirichlet(q.points[j]);
          s += q.weights[j] * (pen * g * v0(i, static_cast<int>(j)) -
                               g * dn0(i, static_cast<int>(j)));
        }
        sys.l[sys.dof_offset[k0] + i] += s;
      }
    }
  }
  return sys;
}

inline AssembledSystem<std::complex<double>>
assemble_helmholtz(const Mesh &mesh, int p, const HelmholtzProblem &prob) {
  using C = std::complex<double>;
  if (!(prob.omega > 0.0))
    throw std::invalid_argument("assemble_helmholtz: omega must be > 0");
  AssembledSystem<C> sys = detail::make_system<C>(mesh, p);
  const int qdeg = 2 * p + 2;
  const double w = prob.omega;
  const C iw(0.0, w);

  std::vector<ElementBasis> bases;
  for (int k = 0; k < mesh.num_elements(); ++k)
    bases.push_back(make_basis(mesh, k, p));

  for (int k = 0; k < mesh.num_elements(); ++k) {
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    Matrix<double> gx = detail::tabulate(bases[k], q.points, {1, 0});
    Matrix<double> gy = detail::tabulate(bases[k], q.points, {0, 1});
    Matrix<double> ph = detail::tabulate(bases[k], q.points);
    Matrix<C> blk(bases[k].size(), bases[k].size());
    detail::add_outer(blk, q.weights, gx, gx);
    detail::add_outer(blk, q.weights, gy, gy);
    detail::add_outer(blk, q.weights, ph, ph, -w * w);
    sys.A.add_block(k, k, blk);
  }

  for (int fid = 0; fid < mesh.num_facets(); ++fid) {
    const Facet &f = mesh.facets[fid];
    QuadratureRule q = facet_quadrature_for(mesh, fid, qdeg);
    std::vector<C> wq(q.weights.begin(), q.weights.end());
    Vec2 n = f.unit_normal;
    if (!f.is_boundary()) {
      int kp = f.adjacent[0], km = f.adjacent[1];
      Matrix<double> v[2] = {detail::tabulate(bases[kp], q.points),
                             detail::tabulate(bases[km], q.points)};
      Matrix<double> dn[2] = {detail::tabulate_normal_deriv(bases[kp], q.points, n),
                              detail::tabulate_normal_deriv(bases[km], q.points, n)};
      int elem[2] = {kp, km};
      double sgn[2] = {1.0, -1.0};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Matrix<C> blk(v[a].rows(), v[b].rows());
          // -(avg(dn u) jump(v) + jump(u) avg(dn v))
          detail::add_outer(blk, wq, dn[b], v[a], C(-0.5 * sgn[a]));
          detail::add_outer(blk, wq, v[b], dn[a], C(-0.5 * sgn[b]));
          // + i alpha w jump(u) jump(v) - (beta/iw) jump(dn u) jump(dn v)
          detail::add_outer(blk, wq, v[b], v[a], C(0.0, prob.alpha * w) * C(sgn[a] * sgn[b]));
          detail::add_outer(blk, wq, dn[b], dn[a], C(-prob.beta) / iw * C(sgn[a] * sgn[b]));
          sys.A.add_block(elem[a], elem[b], blk);
        }
    } else {
      int k0 = f.adjacent[0];
      Matrix<double> v0 = detail::tabulate(bases[k0], q.points);
      Matrix<double> dn0 = detail::tabulate_normal_deriv(bases[k0], q.points, n);
      Matrix<C> blk(v0.rows(), v0.rows());
      detail::add_outer(blk, wq, dn0, v0, C(-prob.delta));
      detail::add_outer(blk, wq, v0, dn0, C(-prob.delta));
      detail::add_outer(blk, wq, v0, v0, C(0.0, (1.0 - prob.delta) * w));
      detail::add_outer(blk, wq, dn0, dn0, C(-prob.delta) / iw);
      sys.A.add_block(k0, k0, blk);
      for (int i = 0; i < v0.rows(); ++i) {
        C s(0.0, 0.0);
        for (std::size_t j = 0; j < q.size(); ++j) {
          C g = prob.robin(q.points[j], n);
          s += q.weights[j] * g *
               (C(1.0 - prob.delta) * v0(i, static_cast<int>(j)) -
                C(prob.delta) / iw * dn0(i, static_cast<int>(j)));
        }
        sys.l[sys.dof_offset[k0] + i] += s;
      }
    }
  }
  return sys;
}

inline AssembledSystem<double> assemble_advection(const Mesh &mesh, int p,
                                                  const AdvectionProblem &prob) {
  AssembledSystem<double> sys = detail::make_system<double>(mesh, p);
  const int qdeg = 2 * p + 2;

  std::vector<ElementBasis> bases;
  for (int k = 0; k < mesh.num_elements(); ++k)
    bases.push_back(make_basis(mesh, k, p));

  for (int k = 0; k < mesh.num_elements(); ++k) {
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    Matrix<double> ph = detail::tabulate(bases[k], q.points);
    Matrix<double> gx = detail::tabulate(bases[k], q.points, {1, 0});
    Matrix<double> gy = detail::tabulate(bases[k], q.points, {0, 1});
    // b . grad(test), sampled pointwise
    Matrix<double> bg(ph.rows(), static_cast<int>(q.size()));
    for (std::size_t j = 0; j < q.size(); ++j) {
      double bx = prob.velocity_x(q.points[j]);
      double by = prob.velocity_y(q.points[j]);
      for (int i = 0; i < ph.rows(); ++i)
        bg(i, static_cast<int>(j)) =
            bx * gx(i, static_cast<int>(j)) + by * gy(i, static_cast<int>(j));
    }
    Matrix<double> blk(ph.rows(), ph.rows());
    detail::add_outer(blk, q.weights, ph, bg, -1.0); // -int u (b . grad v)
    sys.A.add_block(k, k, blk);
    if (prob.source) {
      for (int i = 0; i < ph.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j)
          s += q.weights[j] * prob.source(q.points[j]) * ph(i, static_cast<int>(j));
        sys.l[sys.dof_offset[k] + i] += s;
      }
    }
  }

  for (int fid = 0; fid < mesh.num_facets(); ++fid) {
    const Facet &f = mesh.facets[fid];
    QuadratureRule q = facet_quadrature_for(mesh, fid, qdeg);
    Vec2 n = f.unit_normal;
    std::vector<double> bn(q.size());
    for (std::size_t j = 0; j < q.size(); ++j)
      bn[j] = prob.velocity_x(q.points[j]) * n.x + prob.velocity_y(q.points[j]) * n.y;
    std::vector<double> out_w(q.size()), in_w(q.size()); // b.n split by sign
    for (std::size_t j = 0; j < q.size(); ++j) {
      out_w[j] = q.weights[j] * std::max(bn[j], 0.0);
      in_w[j] = q.weights[j] * std::min(bn[j], 0.0);
    }
    if (!f.is_boundary()) {
      int kp = f.adjacent[0], km = f.adjacent[1];
      Matrix<double> vp = detail::tabulate(bases[kp], q.points);
      Matrix<double> vm = detail::tabulate(bases[km], q.points);
      // upwind value: plus side where b.n > 0, minus side where b.n < 0
      Matrix<double> blk_pp(vp.rows(), vp.rows()), blk_pm(vp.rows(), vm.rows());
      Matrix<double> blk_mp(vm.rows(), vp.rows()), blk_mm(vm.rows(), vm.rows());
      detail::add_outer(blk_pp, out_w, vp, vp);
      detail::add_outer(blk_pm, in_w, vm, vp);
      detail::add_outer(blk_mp, out_w, vp, vm, -1.0);
      detail::add_outer(blk_mm, in_w, vm, vm, -1.0);
      sys.A.add_block(kp, kp, blk_pp);
      sys.A.add_block(kp, km, blk_pm);
      sys.A.add_block(km, kp, blk_mp);
      sys.A.add_block(km, km, blk_mm);
    } else {
      int k0 = f.adjacent[0];
      Matrix<double> v0 = detail::tabulate(bases[k0], q.points);
      Matrix<double> blk(v0.rows(), v0.rows());
      detail::add_outer(blk, out_w, v0, v0); // outflow part of the boundary
      sys.A.add_block(k0, k0, blk);
      for (int i = 0; i < v0.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j)
          s -= in_w[j] * prob.inflow(q.points[j]) * v0(i, static_cast<int>(j));
        sys.l[sys.dof_offset[k0] + i] += s;
      }
    }
  }
  return sys;
}

} // namespace trefftz
