#pragma once

#include "dense.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace trefftz {

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
template <class S> struct CsrMatrix {
  int rows = 0, cols = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<S> values;

  std::size_t nnz() const { return values.size(); }

  std::vector<S> apply(const std::vector<S> &x) const {
    std::vector<S> y(rows, S(0));
    for (int i = 0; i < rows; ++i) {
      S s = S(0);
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        s += values[k] * x[col_idx[k]];
      y[i] = s;
    }
    return y;
  }
};

/// Block-structured sparse matrix over a per-element dof partition.
/// Inserting a block twice accumulates.
template <class S> class BlockSparseMatrix {
public:
  BlockSparseMatrix() = default;
  BlockSparseMatrix(std::vector<int> row_offsets, std::vector<int> col_offsets)
      : row_offsets_(std::move(row_offsets)), col_offsets_(std::move(col_offsets)) {}

  /// Uniform partition: nb blocks of size bs on both sides.
  static std::vector<int> uniform_partition(int nb, int bs) {
    std::vector<int> off(nb + 1);
    for (int i = 0; i <= nb; ++i)
      off[i] = i * bs;
    return off;
  }

  int rows() const { return row_offsets_.empty() ? 0 : row_offsets_.back(); }
  int cols() const { return col_offsets_.empty() ? 0 : col_offsets_.back(); }
  int block_rows() const { return static_cast<int>(row_offsets_.size()) - 1; }
  int block_cols() const { return static_cast<int>(col_offsets_.size()) - 1; }
  int row_block_size(int bi) const { return row_offsets_[bi + 1] - row_offsets_[bi]; }
  int col_block_size(int bj) const { return col_offsets_[bj + 1] - col_offsets_[bj]; }
  int row_offset(int bi) const { return row_offsets_[bi]; }
  int col_offset(int bj) const { return col_offsets_[bj]; }
  const std::vector<int> &row_offsets() const { return row_offsets_; }
  const std::vector<int> &col_offsets() const { return col_offsets_; }

  const std::map<std::pair<int, int>, Matrix<S>> &blocks() const { return blocks_; }

  void add_block(int bi, int bj, const Matrix<S> &blk) {
    if (bi < 0 || bi >= block_rows() || bj < 0 || bj >= block_cols())
      throw std::out_of_range("BlockSparseMatrix: block index out of range");
    if (blk.rows() != row_block_size(bi) || blk.cols() != col_block_size(bj))
      throw std::invalid_argument("BlockSparseMatrix: block shape inconsistent with partition");
    auto it = blocks_.find({bi, bj});
    if (it == blocks_.end())
      blocks_.emplace(std::pair{bi, bj}, blk);
    else
      it->second += blk;
  }

  const Matrix<S> *find_block(int bi, int bj) const {
    auto it = blocks_.find({bi, bj});
    return it == blocks_.end() ? nullptr : &it->second;
  }

  std::vector<S> apply(const std::vector<S> &x) const {
    if (static_cast<int>(x.size()) != cols())
      throw std::invalid_argument("BlockSparseMatrix::apply: shape mismatch");
    std::vector<S> y(rows(), S(0));
    for (const auto &[key, blk] : blocks_) {
      int r0 = row_offsets_[key.first], c0 = col_offsets_[key.second];
      for (int i = 0; i < blk.rows(); ++i) {
        S s = S(0);
        for (int j = 0; j < blk.cols(); ++j)
          s += blk(i, j) * x[c0 + j];
        y[r0 + i] += s;
      }
    }
    return y;
  }

  std::vector<S> apply_transpose(const std::vector<S> &x) const {
    if (static_cast<int>(x.size()) != rows())
      throw std::invalid_argument("BlockSparseMatrix::apply_transpose: shape mismatch");
    std::vector<S> y(cols(), S(0));
    for (const auto &[key, blk] : blocks_) {
      int r0 = row_offsets_[key.first], c0 = col_offsets_[key.second];
      for (int i = 0; i < blk.rows(); ++i)
        for (int j = 0; j < blk.cols(); ++j)
          y[c0 + j] += blk(i, j) * x[r0 + i];
    }
    return y;
  }

  Matrix<S> to_dense() const {
    Matrix<S> d(rows(), cols());
    for (const auto &[key, blk] : blocks_) {
      int r0 = row_offsets_[key.first], c0 = col_offsets_[key.second];
      for (int i = 0; i < blk.rows(); ++i)
        for (int j = 0; j < blk.cols(); ++j)
          d(r0 + i, c0 + j) += blk(i, j);
    }
    return d;
  }

  /// Number of stored blocks (the block-level sparsity pattern size).
  std::size_t num_blocks() const { return blocks_.size(); }

private:
  std::vector<int> row_offsets_{0};
  std::vector<int> col_offsets_{0};
  std::map<std::pair<int, int>, Matrix<S>> blocks_;
};

/// Exact entrywise conversion; only magnitudes below 1e-300 are dropped.
template <class S> CsrMatrix<S> to_csr(const BlockSparseMatrix<S> &B) {
  CsrMatrix<S> m;
  m.rows = B.rows();
  m.cols = B.cols();
  m.row_ptr.assign(m.rows + 1, 0);
  const auto &blocks = B.blocks();
  // map iteration is ordered by (block row, block col), so per block row the
  // column blocks come out sorted and rows can be emitted in one pass
  auto it = blocks.begin();
  m.row_ptr[0] = 0;
  for (int bi = 0; bi < B.block_rows(); ++bi) {
    std::vector<std::pair<int, const Matrix<S> *>> in_row;
    while (it != blocks.end() && it->first.first == bi) {
      in_row.emplace_back(it->first.second, &it->second);
      ++it;
    }
    for (int i = 0; i < B.row_block_size(bi); ++i) {
      for (const auto &[bj, blk] : in_row) {
        int c0 = B.col_offset(bj);
        for (int j = 0; j < blk->cols(); ++j) {
          S v = (*blk)(i, j);
          if (std::abs(v) < 1e-300)
            continue;
          m.col_idx.push_back(c0 + j);
          m.values.push_back(v);
        }
      }
      m.row_ptr[B.row_offset(bi) + i + 1] = static_cast<int>(m.col_idx.size());
    }
  }
  return m;
}

namespace detail {
template <class S> Matrix<S> cast_matrix(const Matrix<double> &a) {
  Matrix<S> b(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      b(i, j) = S(a(i, j));
  return b;
}
} // namespace detail

/// T^T A T for a block-diagonal real T and a compatibly partitioned A.
/// The result inherits the block-level sparsity pattern of A.
template <class S>
BlockSparseMatrix<S> triple_product(const BlockSparseMatrix<double> &T,
                                    const BlockSparseMatrix<S> &A) {
  if (T.row_offsets() != A.row_offsets() || A.row_offsets() != A.col_offsets())
    throw std::invalid_argument("triple_product: incompatible partitions");
  BlockSparseMatrix<S> R(T.col_offsets(), T.col_offsets());
  for (const auto &[key, blk] : A.blocks()) {
    auto [bi, bj] = key;
    const Matrix<double> *Ti = T.find_block(bi, bi);
    const Matrix<double> *Tj = T.find_block(bj, bj);
    if (!Ti || !Tj)
      throw std::invalid_argument("triple_product: T lacks a diagonal block");
    if (Ti->cols() == 0 || Tj->cols() == 0)
      continue;
    Matrix<S> TiS = detail::cast_matrix<S>(Ti->transposed());
    Matrix<S> TjS = detail::cast_matrix<S>(*Tj);
    R.add_block(bi, bj, TiS * (blk * TjS));
  }
  return R;
}

// ---------------------------------------------------------------------------
// Linear solvers
// ---------------------------------------------------------------------------

enum class SymmetryHint { general, spd };

struct SolveReport {
  bool converged = true;
  int iterations = 0;
  double relative_residual = 0.0;
  std::string method;
};

namespace detail {

template <class S>
double relative_residual(const CsrMatrix<S> &M, const std::vector<S> &x,
                         const std::vector<S> &rhs) {
  std::vector<S> r = M.apply(x);
  double rn = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    rn += scalar_traits<S>::abs2(rhs[i] - r[i]);
  double bn = vector_norm(rhs);
  return bn > 0.0 ? std::sqrt(rn) / bn : std::sqrt(rn);
}

/// Jacobi-preconditioned conjugate gradients.
inline std::vector<double> pcg(const CsrMatrix<double> &M, const std::vector<double> &rhs,
                               double tol, long max_iter, SolveReport &rep) {
  const int n = M.rows;
  std::vector<double> diag(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k)
      if (M.col_idx[k] == i && M.values[k] != 0.0)
        diag[i] = M.values[k];
  std::vector<double> x(n, 0.0), r = rhs, z(n), p(n);
  double bnorm = vector_norm(rhs);
  if (bnorm == 0.0) {
    rep = {true, 0, 0.0, "cg"};
    return x;
  }
  for (int i = 0; i < n; ++i)
    z[i] = r[i] / diag[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i)
    rz += r[i] * z[i];
  long it = 0;
  for (; it < max_iter; ++it) {
    std::vector<double> Ap = M.apply(p);
    double pAp = 0.0;
    for (int i = 0; i < n; ++i)
      pAp += p[i] * Ap[i];
    if (pAp <= 0.0)
      break; // not SPD after all
    double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    if (vector_norm(r) <= tol * bnorm)
      break;
    double rz_new = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = r[i] / diag[i];
      rz_new += r[i] * z[i];
    }
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i)
      p[i] = z[i] + beta * p[i];
  }
  rep.method = "cg";
  rep.iterations = static_cast<int>(it);
  rep.relative_residual = vector_norm(r) / bnorm;
  rep.converged = rep.relative_residual <= 10.0 * tol;
  return x;
}

/// ILU(0) factors stored in-place on a copy of the CSR values.
template <class S> struct Ilu0 {
  const CsrMatrix<S> *pattern = nullptr;
  std::vector<S> values;
  std::vector<int> diag_pos;

  explicit Ilu0(const CsrMatrix<S> &M) : pattern(&M), values(M.values) {
    const int n = M.rows;
    diag_pos.assign(n, -1);
    for (int i = 0; i < n; ++i)
      for (int k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k)
        if (M.col_idx[k] == i)
          diag_pos[i] = k;
    for (int i = 0; i < n; ++i)
      if (diag_pos[i] < 0 || values[diag_pos[i]] == S(0))
        throw std::runtime_error("ilu0: zero or missing diagonal");
    for (int i = 1; i < n; ++i) {
      for (int kk = M.row_ptr[i]; kk < M.row_ptr[i + 1]; ++kk) {
        int k = M.col_idx[kk];
        if (k >= i)
          break;
        S f = values[kk] / values[diag_pos[k]];
        values[kk] = f;
        // subtract f * row k from row i on the existing pattern
        int pk = diag_pos[k] + 1;
        int pi = kk + 1;
        while (pk < M.row_ptr[k + 1] && pi < M.row_ptr[i + 1]) {
          int ck = M.col_idx[pk], ci = M.col_idx[pi];
          if (ck == ci) {
            values[pi] -= f * values[pk];
            ++pk;
            ++pi;
          } else if (ck < ci) {
            ++pk;
          } else {
            ++pi;
          }
        }
      }
      if (values[diag_pos[i]] == S(0))
        throw std::runtime_error("ilu0: zero pivot");
    }
  }

  std::vector<S> solve(const std::vector<S> &b) const {
    const CsrMatrix<S> &M = *pattern;
    const int n = M.rows;
    std::vector<S> y(b);
    for (int i = 0; i < n; ++i) {
      S s = y[i];
      for (int k = M.row_ptr[i]; k < M.row_ptr[i + 1] && M.col_idx[k] < i; ++k)
        s -= values[k] * y[M.col_idx[k]];
      y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      S s = y[i];
      for (int k = M.row_ptr[i + 1] - 1; k >= M.row_ptr[i] && M.col_idx[k] > i; --k)
        s -= values[k] * y[M.col_idx[k]];
      y[i] = s / values[diag_pos[i]];
    }
    return y;
  }
};

/// Restarted GMRES with right ILU(0) preconditioning.
template <class S>
std::vector<S> gmres(const CsrMatrix<S> &M, const std::vector<S> &rhs, double tol,
                     long max_iter, SolveReport &rep) {
  using traits = scalar_traits<S>;
  const int n = M.rows;
  const int restart = std::min<long>(std::min(n, 300), max_iter);
  rep.method = "gmres+ilu0";
  double bnorm = vector_norm(rhs);
  std::vector<S> x(n, S(0));
  if (bnorm == 0.0) {
    rep.converged = true;
    return x;
  }
  Ilu0<S> prec(M);
  long total_it = 0;
  double resid = 1.0;
  while (total_it < max_iter) {
    std::vector<S> r = M.apply(x);
    for (int i = 0; i < n; ++i)
      r[i] = rhs[i] - r[i];
    double beta = vector_norm(r);
    resid = beta / bnorm;
    if (resid <= tol)
      break;
    std::vector<std::vector<S>> V;
    V.push_back(r);
    for (S &v : V[0])
      v = v / S(beta);
    std::vector<std::vector<S>> H; // H[j] holds column j (j+2 entries)
    std::vector<S> cs_rot, sn_rot;
    std::vector<S> g(1, S(beta));
    int j = 0;
    for (; j < restart && total_it < max_iter; ++j, ++total_it) {
      std::vector<S> w = M.apply(prec.solve(V[j]));
      std::vector<S> h(j + 2, S(0));
      for (int i = 0; i <= j; ++i) {
        S dot = S(0);
        for (int r2 = 0; r2 < n; ++r2)
          dot += traits::conj(V[i][r2]) * w[r2];
        h[i] = dot;
        for (int r2 = 0; r2 < n; ++r2)
          w[r2] -= dot * V[i][r2];
      }
      double wn = vector_norm(w);
      h[j + 1] = S(wn);
      // apply accumulated Givens rotations to the new column
      for (int i = 0; i < j; ++i) {
        S t = cs_rot[i] * h[i] + sn_rot[i] * h[i + 1];
        h[i + 1] = -traits::conj(sn_rot[i]) * h[i] + traits::conj(cs_rot[i]) * h[i + 1];
        h[i] = t;
      }
      double denom = std::sqrt(traits::abs2(h[j]) + wn * wn);
      S c, s;
      if (denom == 0.0) {
        c = S(1);
        s = S(0);
      } else {
        c = traits::conj(h[j]) / S(denom);
        s = traits::conj(h[j + 1]) / S(denom);
      }
      cs_rot.push_back(c);
      sn_rot.push_back(s);
      S t = c * h[j] + s * h[j + 1];
      h[j] = t;
      h[j + 1] = S(0);
      g.push_back(S(0));
      S gt = c * g[j];
      g[j + 1] = -traits::conj(s) * g[j];
      g[j] = gt;
      H.push_back(std::move(h));
      resid = std::abs(g[j + 1]) / bnorm;
      if (wn == 0.0 || resid <= tol) {
        ++j;
        break;
      }
      V.push_back(w);
      for (S &v : V.back())
        v = v / S(wn);
    }
    // back substitution for y, then x += M^{-1} (V y)
    std::vector<S> y(j, S(0));
    for (int i = j - 1; i >= 0; --i) {
      S s = g[i];
      for (int k2 = i + 1; k2 < j; ++k2)
        s -= H[k2][i] * y[k2];
      y[i] = s / H[i][i];
    }
    std::vector<S> z(n, S(0));
    for (int i = 0; i < j; ++i)
      for (int r2 = 0; r2 < n; ++r2)
        z[r2] += y[i] * V[i][r2];
    z = prec.solve(z);
    for (int r2 = 0; r2 < n; ++r2)
      x[r2] += z[r2];
    if (resid <= tol)
      break;
  }
  rep.iterations = static_cast<int>(total_it);
  rep.relative_residual = relative_residual(M, x, rhs);
  rep.converged = rep.relative_residual <= 10.0 * tol;
  return x;
}

template <class S>
std::vector<S> dense_lu_path(const CsrMatrix<S> &M, const std::vector<S> &rhs,
                             SolveReport &rep) {
  Matrix<S> D(M.rows, M.cols);
  for (int i = 0; i < M.rows; ++i)
    for (int k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k)
      D(i, M.col_idx[k]) += M.values[k];
  std::vector<S> x = lu_solve(D, rhs);
  rep.method = "dense-lu";
  rep.iterations = 0;
  rep.relative_residual = relative_residual(M, x, rhs);
  rep.converged = true;
  return x;
}

} // namespace detail

/// Direct solve for small systems, preconditioned iteration otherwise.
/// Non-convergence comes back through the report with the achieved residual.
template <class S>
std::vector<S> solve(const CsrMatrix<S> &M, const std::vector<S> &rhs,
                     SymmetryHint hint = SymmetryHint::general,
                     SolveReport *report = nullptr) {
  if (M.rows != M.cols || M.rows != static_cast<int>(rhs.size()))
    throw std::invalid_argument("solve: shape mismatch");
  SolveReport rep;
  std::vector<S> x;
  const double tol = 1e-10;
  const long cap = 20L * std::max(1, M.rows);
  if (M.rows == 0) {
    if (report)
      *report = {true, 0, 0.0, "empty"};
    return {};
  }
  if (M.rows <= 2000) {
    x = detail::dense_lu_path(M, rhs, rep);
  } else if constexpr (std::is_same_v<S, double>) {
    if (hint == SymmetryHint::spd)
      x = detail::pcg(M, rhs, tol, cap, rep);
    else
      x = detail::gmres(M, rhs, tol, cap, rep);
  } else {
    x = detail::gmres(M, rhs, tol, cap, rep);
  }
  if (report)
    *report = rep;
  else if (!rep.converged)
    throw std::runtime_error("solve: iteration did not converge, residual " +
                             std::to_string(rep.relative_residual));
  return x;
}

} // namespace trefftz
