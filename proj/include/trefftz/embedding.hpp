#pragma once

#include "dgforms.hpp"

#include <optional>

namespace trefftz {

/// Element blocks W_K with (W_K)_ij = <L phi_j, Ltilde phi_i>_K, plus the
/// Cholesky factors of the element mass matrices. The factors let the
/// kernel detection run on the mass-whitened blocks R^-T W_K R^-1, i.e. in
/// an L2-orthonormal basis, where the singular-value split is basis
/// independent. With raw scaled-monomial blocks the smallest true nonzero
/// singular value drops below eps = 1e-7 around p = 5.
struct LocalOperator {
  BlockSparseMatrix<double> W;
  std::vector<Matrix<double>> mass_chol; // upper R with M_K = R^T R
  int p = 0;
};

inline LocalOperator assemble_W(const Mesh &mesh, int p, const DiffOp &L,
                                const DiffOp &Ltilde) {
  LocalOperator op;
  op.p = p;
  int nE = mesh.num_elements();
  int nk = basis_dimension(mesh.dim, p);
  auto part = BlockSparseMatrix<double>::uniform_partition(nE, nk);
  op.W = BlockSparseMatrix<double>(part, part);
  op.mass_chol.reserve(nE);
  const int qdeg = 2 * p + 2;
  for (int k = 0; k < nE; ++k) {
    ElementBasis basis = make_basis(mesh, k, p);
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    const int nq = static_cast<int>(q.size());
    Matrix<double> Lphi(nk, nq), Ltphi(nk, nq), phi(nk, nq);
    for (int j = 0; j < nk; ++j)
      for (int iq = 0; iq < nq; ++iq) {
        Lphi(j, iq) = apply_to_basis(L, basis, j, q.points[iq]);
        Ltphi(j, iq) = apply_to_basis(Ltilde, basis, j, q.points[iq]);
        phi(j, iq) = eval(basis, j, q.points[iq]);
      }
    Matrix<double> Wk(nk, nk), Mk(nk, nk);
    detail::add_outer(Wk, q.weights, Lphi, Ltphi);
    detail::add_outer(Mk, q.weights, phi, phi);
    op.W.add_block(k, k, Wk);
    op.mass_chol.push_back(cholesky_upper(Mk));
  }
  return op;
}

struct ElementKernelDiagnostics {
  std::vector<double> singular_values; // of the whitened block, descending
  double max_zero_sv = 0.0;
  double min_nonzero_sv = std::numeric_limits<double>::infinity();
};

/// The Trefftz embedding: per-element orthonormal kernel bases T_K stacked
/// into the block-diagonal T, with T^T T = I.
struct TrefftzEmbedding {
  std::vector<Matrix<double>> blocks;       // T_K, N_K x M_K
  std::vector<int> kernel_dims;             // M_K
  BlockSparseMatrix<double> T;
  std::vector<ElementKernelDiagnostics> diagnostics;
  std::optional<std::vector<double>> particular; // u_f in DG dof numbering
  int reduced_dim = 0;                      // M = sum M_K
  int dg_dim = 0;                           // N = sum N_K
};

namespace detail {

/// R^-T B for upper-triangular R, column by column.
inline Matrix<double> solve_transposed_left(const Matrix<double> &R, const Matrix<double> &B) {
  Matrix<double> X(B.rows(), B.cols());
  std::vector<double> col(B.rows());
  for (int j = 0; j < B.cols(); ++j) {
    for (int i = 0; i < B.rows(); ++i)
      col[i] = B(i, j);
    col = solve_upper_transposed(R, col);
    for (int i = 0; i < B.rows(); ++i)
      X(i, j) = col[i];
  }
  return X;
}

/// R^-1 B for upper-triangular R, column by column.
inline Matrix<double> solve_left(const Matrix<double> &R, const Matrix<double> &B) {
  Matrix<double> X(B.rows(), B.cols());
  std::vector<double> col(B.rows());
  for (int j = 0; j < B.cols(); ++j) {
    for (int i = 0; i < B.rows(); ++i)
      col[i] = B(i, j);
    col = solve_upper(R, col);
    for (int i = 0; i < B.rows(); ++i)
      X(i, j) = col[i];
  }
  return X;
}

/// R^-T W R^-1 via two triangular solves: Y = R^-T W, then
/// (R^-T Y^T)^T = Y R^-1.
inline Matrix<double> whiten(const Matrix<double> &R, const Matrix<double> &W) {
  Matrix<double> Y = solve_transposed_left(R, W);
  return solve_transposed_left(R, Y.transposed()).transposed();
}

/// Two-pass modified Gram-Schmidt; columns are assumed full rank.
inline void orthonormalize_columns(Matrix<double> &A) {
  for (int j = 0; j < A.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < j; ++k) {
        double dot = 0.0;
        for (int r = 0; r < A.rows(); ++r)
          dot += A(r, k) * A(r, j);
        for (int r = 0; r < A.rows(); ++r)
          A(r, j) -= dot * A(r, k);
      }
    double nrm = 0.0;
    for (int r = 0; r < A.rows(); ++r)
      nrm += A(r, j) * A(r, j);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0)
      throw std::runtime_error("embedding: rank-deficient kernel basis");
    for (int r = 0; r < A.rows(); ++r)
      A(r, j) /= nrm;
  }
}

} // namespace detail

/// Extracts the per-element kernels of W into the embedding. The kernel
/// dimension is detected from the singular values (threshold eps), never
/// supplied by the caller.
inline TrefftzEmbedding build_embedding(const LocalOperator &op, double eps = 1e-7,
                                        KernelMethod method = KernelMethod::svd) {
  TrefftzEmbedding emb;
  const int nb = op.W.block_rows();
  emb.dg_dim = op.W.rows();
  std::vector<int> col_offsets(1, 0);
  for (int k = 0; k < nb; ++k) {
    const Matrix<double> *Wk = op.W.find_block(k, k);
    if (!Wk)
      throw std::invalid_argument("build_embedding: missing diagonal W block");
    const Matrix<double> &R = op.mass_chol[k];
    Matrix<double> whitened = detail::whiten(R, *Wk);
    KernelResult kr = kernel(whitened, eps, method);
    Matrix<double> Tk = detail::solve_left(R, kr.kernel_basis);
    if (Tk.cols() > 0)
      detail::orthonormalize_columns(Tk);
    emb.kernel_dims.push_back(kr.M_K);
    emb.blocks.push_back(std::move(Tk));
    emb.diagnostics.push_back(
        {std::move(kr.singular_values), kr.max_zero_sv, kr.min_nonzero_sv});
    col_offsets.push_back(col_offsets.back() + kr.M_K);
  }
  emb.reduced_dim = col_offsets.back();
  emb.T = BlockSparseMatrix<double>(op.W.row_offsets(), col_offsets);
  for (int k = 0; k < nb; ++k)
    emb.T.add_block(k, k, emb.blocks[k]);
  return emb;
}

struct ParticularSolution {
  std::vector<double> values;       // u_f
  std::vector<int> warned_elements; // least-squares residual > 1e-6 |w_K|
  double max_relative_residual = 0.0;
};

/// Element-local particular solutions (u_f)_K = W_K^+ w_K with
/// (w_K)_i = <f, Ltilde phi_i>_K, computed through the same whitening as
/// the kernel extraction.
inline ParticularSolution particular_solution(const LocalOperator &op,
                                              const std::function<double(Vec2)> &f,
                                              const DiffOp &Ltilde, const Mesh &mesh,
                                              int p, double eps = 1e-7) {
  ParticularSolution out;
  out.values.assign(op.W.rows(), 0.0);
  const int nk = basis_dimension(mesh.dim, p);
  const int qdeg = 2 * p + 2;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    ElementBasis basis = make_basis(mesh, k, p);
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    std::vector<double> w(nk, 0.0);
    for (int i = 0; i < nk; ++i) {
      double s = 0.0;
      for (std::size_t iq = 0; iq < q.size(); ++iq)
        s += q.weights[iq] * f(q.points[iq]) * apply_to_basis(Ltilde, basis, i, q.points[iq]);
      w[i] = s;
    }
    const Matrix<double> &R = op.mass_chol[k];
    const Matrix<double> &Wk = *op.W.find_block(k, k);
    Matrix<double> whitened = detail::whiten(R, Wk);
    std::vector<double> wt = solve_upper_transposed(R, w);
    std::vector<double> ut = pseudo_apply(whitened, wt, eps);
    std::vector<double> uf = solve_upper(R, ut);
    // residual against the raw block: W_K u_f - w_K
    std::vector<double> res = Wk * uf;
    double rn = 0.0, wn = 0.0;
    for (int i = 0; i < nk; ++i) {
      rn += (res[i] - w[i]) * (res[i] - w[i]);
      wn += w[i] * w[i];
    }
    rn = std::sqrt(rn);
    wn = std::sqrt(wn);
    if (wn > 0.0) {
      out.max_relative_residual = std::max(out.max_relative_residual, rn / wn);
      if (rn > 1e-6 * wn)
        out.warned_elements.push_back(k);
    }
    for (int i = 0; i < nk; ++i)
      out.values[k * nk + i] = uf[i];
  }
  return out;
}

template <class S> struct EmbeddedSolveResult {
  std::vector<S> u_h;       // DG coefficients, u_h = T u_T + u_f
  std::vector<S> u_reduced; // u_T
  int N = 0;
  int M = 0;
  std::size_t nnz_full = 0;
  std::size_t nnz_reduced = 0;
  SolveReport solver;
};

/// Galerkin projection onto the embedded space:
/// solve (T^T A T) u_T = T^T (l - A u_f), reconstruct u_h = T u_T + u_f.
template <class S>
EmbeddedSolveResult<S> solve_embedded(const AssembledSystem<S> &sys,
                                      const TrefftzEmbedding &emb) {
  if (sys.N != emb.dg_dim)
    throw std::invalid_argument("solve_embedded: embedding does not match system");
  EmbeddedSolveResult<S> out;
  out.N = sys.N;
  out.M = emb.reduced_dim;
  out.nnz_full = to_csr(sys.A).nnz();

  std::vector<S> rhs = sys.l;
  std::vector<S> uf_cast;
  if (emb.particular) {
    uf_cast.assign(emb.particular->begin(), emb.particular->end());
    std::vector<S> Auf = sys.A.apply(uf_cast);
    for (int i = 0; i < sys.N; ++i)
      rhs[i] -= Auf[i];
  }

  BlockSparseMatrix<S> reduced = triple_product(emb.T, sys.A);
  CsrMatrix<S> Rc = to_csr(reduced);
  out.nnz_reduced = Rc.nnz();

  // T^T rhs needs the embedding cast to the system's scalar type
  std::vector<S> rhs_r(emb.reduced_dim, S(0));
  {
    const auto &roff = emb.T.row_offsets();
    const auto &coff = emb.T.col_offsets();
    for (int k = 0; k < emb.T.block_rows(); ++k) {
      const Matrix<double> &Tk = emb.blocks[k];
      for (int j = 0; j < Tk.cols(); ++j) {
        S s = S(0);
        for (int i = 0; i < Tk.rows(); ++i)
          s += S(Tk(i, j)) * rhs[roff[k] + i];
        rhs_r[coff[k] + j] = s;
      }
    }
  }

  out.u_reduced = solve(Rc, rhs_r, sys.hint, &out.solver);
  if (!out.solver.converged)
    throw std::runtime_error("solve_embedded: reduced solve did not converge, residual " +
                             std::to_string(out.solver.relative_residual));

  out.u_h.assign(sys.N, S(0));
  {
    const auto &roff = emb.T.row_offsets();
    const auto &coff = emb.T.col_offsets();
    for (int k = 0; k < emb.T.block_rows(); ++k) {
      const Matrix<double> &Tk = emb.blocks[k];
      for (int i = 0; i < Tk.rows(); ++i) {
        S s = S(0);
        for (int j = 0; j < Tk.cols(); ++j)
          s += S(Tk(i, j)) * out.u_reduced[coff[k] + j];
        out.u_h[roff[k] + i] = s;
      }
    }
  }
  if (emb.particular)
    for (int i = 0; i < sys.N; ++i)
      out.u_h[i] += uf_cast[i];
  return out;
}

/// Pointwise strong-Trefftz residual per element: max over quadrature
/// points of |L(column)|, normalized by the column's H^order seminorm
/// over sqrt(element measure). Only meaningful when L has constant
/// coefficients and served as its own test operator; returns nullopt for
/// the weak case.
inline std::optional<std::vector<double>>
trefftz_residual(const TrefftzEmbedding &emb, const DiffOp &L, const Mesh &mesh, int p) {
  if (!L.all_constant())
    return std::nullopt;
  const int ord = L.max_order();
  const int qdeg = 2 * p + 2;
  std::vector<double> out;
  out.reserve(mesh.num_elements());
  // multi-indices of order ord with multinomial weights, for the seminorm
  std::vector<std::pair<MultiIndex, double>> seminorm_terms;
  for (int dx = 0; dx <= ord; ++dx) {
    int dy = ord - dx;
    if (mesh.dim == 1 && dy != 0)
      continue;
    double binom = 1.0;
    for (int i = 0; i < dx; ++i)
      binom = binom * (ord - i) / (i + 1);
    seminorm_terms.push_back({{dx, dy}, mesh.dim == 1 ? 1.0 : binom});
  }
  for (int k = 0; k < mesh.num_elements(); ++k) {
    ElementBasis basis = make_basis(mesh, k, p);
    QuadratureRule q = quadrature_for(mesh, k, qdeg);
    const int nk = basis.size();
    const int nq = static_cast<int>(q.size());
    const Matrix<double> &Tk = emb.blocks[k];
    double worst = 0.0;
    for (int col = 0; col < Tk.cols(); ++col) {
      double maxres = 0.0;
      double semi2 = 0.0;
      for (int iq = 0; iq < nq; ++iq) {
        double lv = 0.0;
        for (int j = 0; j < nk; ++j)
          lv += Tk(j, col) * apply_to_basis(L, basis, j, q.points[iq]);
        maxres = std::max(maxres, std::abs(lv));
        for (const auto &[d, wgt] : seminorm_terms) {
          double dv = 0.0;
          for (int j = 0; j < nk; ++j)
            dv += Tk(j, col) * eval_deriv(basis, j, d, q.points[iq]);
          semi2 += wgt * q.weights[iq] * dv * dv;
        }
      }
      double scale = std::sqrt(semi2 / mesh.elements[k].measure);
      if (scale > 0.0)
        worst = std::max(worst, maxres / scale);
      else if (maxres > 0.0)
        worst = std::max(worst, maxres);
    }
    out.push_back(worst);
  }
  return out;
}

} // namespace trefftz
