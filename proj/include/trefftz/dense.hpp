#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace trefftz {

namespace detail {
template <class S> struct scalar_traits {
  static double abs2(S x) { return x * x; }
  static S conj(S x) { return x; }
};
template <class T> struct scalar_traits<std::complex<T>> {
  static double abs2(std::complex<T> x) { return std::norm(x); }
  static std::complex<T> conj(std::complex<T> x) { return std::conj(x); }
};
} // namespace detail

/// Dense row-major matrix over double or complex<double>.
template <class S> class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols, S value = S(0))
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, value) {
    if (rows < 0 || cols < 0)
      throw std::invalid_argument("Matrix: negative dimension");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      m(i, i) = S(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  S &operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const S &operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  S *data() { return a_.data(); }
  const S *data() const { return a_.data(); }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j)
        t(j, i) = (*this)(i, j);
    return t;
  }

  /// Conjugate transpose; equals transposed() for real scalars.
  Matrix adjoint() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j)
        t(j, i) = detail::scalar_traits<S>::conj((*this)(i, j));
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const S &v : a_)
      s += detail::scalar_traits<S>::abs2(v);
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (const S &v : a_)
      if (!std::isfinite(std::abs(v)))
        return false;
    return true;
  }

  Matrix &operator+=(const Matrix &o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i)
      a_[i] += o.a_[i];
    return *this;
  }

  Matrix &operator-=(const Matrix &o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i)
      a_[i] -= o.a_[i];
    return *this;
  }

  Matrix &operator*=(S s) {
    for (S &v : a_)
      v *= s;
    return *this;
  }

private:
  void check_same_shape(const Matrix &o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("Matrix: shape mismatch");
  }

  int rows_ = 0, cols_ = 0;
  std::vector<S> a_;
};

template <class S> Matrix<S> operator*(const Matrix<S> &a, const Matrix<S> &b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("Matrix multiply: shape mismatch");
  Matrix<S> c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      S aik = a(i, k);
      if (aik == S(0))
        continue;
      for (int j = 0; j < b.cols(); ++j)
        c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class S>
std::vector<S> operator*(const Matrix<S> &a, const std::vector<S> &x) {
  if (a.cols() != static_cast<int>(x.size()))
    throw std::invalid_argument("Matrix-vector multiply: shape mismatch");
  std::vector<S> y(a.rows(), S(0));
  for (int i = 0; i < a.rows(); ++i) {
    S s = S(0);
    for (int j = 0; j < a.cols(); ++j)
      s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

template <class S> double vector_norm(const std::vector<S> &x) {
  double s = 0.0;
  for (const S &v : x)
    s += detail::scalar_traits<S>::abs2(v);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// SVD (one-sided Jacobi)
// ---------------------------------------------------------------------------

template <class S> struct SvdResult {
  Matrix<S> U;                        // m x k, orthonormal columns
  std::vector<double> singular_values; // descending, length k = min(m,n)
  Matrix<S> V;                        // n x k, orthonormal columns
};

namespace detail {

/// One-sided Jacobi on the columns of G (m >= n assumed by the caller
/// through the transpose trick in svd()). Accumulates V with G = A V.
template <class S>
void jacobi_sweeps(Matrix<S> &G, Matrix<S> &V) {
  using traits = scalar_traits<S>;
  const int m = G.rows(), n = G.cols();
  const double tol = 1e-14;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < n - 1; ++i)
      for (int j = i + 1; j < n; ++j) {
        double a = 0.0, b = 0.0;
        S c = S(0);
        for (int r = 0; r < m; ++r) {
          a += traits::abs2(G(r, i));
          b += traits::abs2(G(r, j));
          c += traits::conj(G(r, i)) * G(r, j);
        }
        double cabs = std::abs(c);
        if (cabs <= tol * std::sqrt(a * b) || cabs == 0.0)
          continue;
        rotated = true;
        S phase = c / cabs;
        double zeta = (b - a) / (2.0 * cabs);
        double t = ((zeta >= 0) ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double cs = 1.0 / std::sqrt(1.0 + t * t);
        double sn = cs * t;
        S pc = traits::conj(phase);
        for (int r = 0; r < m; ++r) {
          S gi = G(r, i), gj = G(r, j);
          G(r, i) = cs * gi - sn * (pc * gj);
          G(r, j) = sn * (phase * gi) + cs * gj;
        }
        for (int r = 0; r < n; ++r) {
          S vi = V(r, i), vj = V(r, j);
          V(r, i) = cs * vi - sn * (pc * vj);
          V(r, j) = sn * (phase * vi) + cs * vj;
        }
      }
    if (!rotated)
      return;
  }
  throw std::runtime_error("svd: Jacobi iteration did not converge");
}

/// Orthonormalizes near-null columns of U against the others so the factor
/// keeps orthonormal columns even for rank-deficient input.
template <class S>
void complete_orthonormal(Matrix<S> &U, const std::vector<bool> &needs_fill) {
  using traits = scalar_traits<S>;
  const int m = U.rows(), k = U.cols();
  int try_axis = 0;
  for (int col = 0; col < k; ++col) {
    if (!needs_fill[col])
      continue;
    for (; try_axis <= m; ++try_axis) {
      if (try_axis == m)
        throw std::runtime_error("svd: failed to complete orthonormal basis");
      std::vector<S> v(m, S(0));
      v[try_axis] = S(1);
      for (int pass = 0; pass < 2; ++pass)
        for (int c = 0; c < k; ++c) {
          if (c == col || (needs_fill[c] && c > col))
            continue;
          S proj = S(0);
          for (int r = 0; r < m; ++r)
            proj += traits::conj(U(r, c)) * v[r];
          for (int r = 0; r < m; ++r)
            v[r] -= proj * U(r, c);
        }
      double nrm = vector_norm(v);
      if (nrm > 0.5) {
        for (int r = 0; r < m; ++r)
          U(r, col) = v[r] / nrm;
        ++try_axis;
        break;
      }
    }
  }
}

} // namespace detail

/// Thin SVD, M = U diag(sigma) V^H with sigma descending. Always exists;
/// a non-converged Jacobi iteration (bounded sweeps) throws.
template <class S> SvdResult<S> svd(const Matrix<S> &M) {
  if (!M.all_finite())
    throw std::invalid_argument("svd: matrix has non-finite entries");
  const bool flip = M.rows() < M.cols();
  Matrix<S> G = flip ? M.adjoint() : M;
  const int m = G.rows(), n = G.cols();
  Matrix<S> V = Matrix<S>::identity(n);
  detail::jacobi_sweeps(G, V);

  std::vector<double> sig(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int r = 0; r < m; ++r)
      s += detail::scalar_traits<S>::abs2(G(r, j));
    sig[j] = std::sqrt(s);
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return sig[a] > sig[b]; });

  Matrix<S> U(m, n), Vs(n, n);
  std::vector<double> s_sorted(n);
  double smax = n ? sig[perm[0]] : 0.0;
  std::vector<bool> needs_fill(n, false);
  for (int j = 0; j < n; ++j) {
    int src = perm[j];
    s_sorted[j] = sig[src];
    for (int r = 0; r < n; ++r)
      Vs(r, j) = V(r, src);
    if (sig[src] > smax * 1e-14 && sig[src] > 0.0) {
      for (int r = 0; r < m; ++r)
        U(r, j) = G(r, src) / sig[src];
    } else {
      needs_fill[j] = true;
    }
  }
  detail::complete_orthonormal(U, needs_fill);

  SvdResult<S> out;
  out.singular_values = std::move(s_sorted);
  if (flip) {
    out.U = std::move(Vs);
    out.V = std::move(U);
  } else {
    out.U = std::move(U);
    out.V = std::move(Vs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// QR (Householder, optional column pivoting)
// ---------------------------------------------------------------------------

template <class S> struct QrResult {
  Matrix<S> Q;              // m x m, orthonormal
  Matrix<S> R;              // m x n, upper triangular
  std::vector<int> permutation; // M(:, perm) = Q R when pivoted; identity otherwise
};

template <class S> QrResult<S> qr(const Matrix<S> &M, bool column_pivoting = false) {
  using traits = detail::scalar_traits<S>;
  const int m = M.rows(), n = M.cols();
  Matrix<S> R = M;
  Matrix<S> Q = Matrix<S>::identity(m);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> colnorm2(n, 0.0);
  if (column_pivoting)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i)
        colnorm2[j] += traits::abs2(R(i, j));

  const int steps = std::min(m, n);
  std::vector<S> v(m);
  for (int k = 0; k < steps; ++k) {
    if (column_pivoting) {
      int best = k;
      double bestn = -1.0;
      for (int j = k; j < n; ++j) {
        double nn = 0.0;
        for (int i = k; i < m; ++i)
          nn += traits::abs2(R(i, j));
        if (nn > bestn) {
          bestn = nn;
          best = j;
        }
      }
      if (best != k) {
        for (int i = 0; i < m; ++i)
          std::swap(R(i, k), R(i, best));
        std::swap(perm[k], perm[best]);
      }
    }
    double xnorm = 0.0;
    for (int i = k; i < m; ++i)
      xnorm += traits::abs2(R(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0)
      continue;
    // Householder vector: v = x + sign(x_k)|x| e_k (phase-correct for complex)
    S xk = R(k, k);
    double xkabs = std::abs(xk);
    S alpha = (xkabs > 0.0) ? S(xk / xkabs * xnorm) : S(xnorm);
    double vnorm2 = 0.0;
    for (int i = k; i < m; ++i) {
      v[i] = R(i, k);
      if (i == k)
        v[i] += alpha;
      vnorm2 += traits::abs2(v[i]);
    }
    if (vnorm2 == 0.0)
      continue;
    // apply H = I - 2 v v^H / |v|^2 to R (columns k..n) and accumulate into Q
    for (int j = k; j < n; ++j) {
      S dot = S(0);
      for (int i = k; i < m; ++i)
        dot += traits::conj(v[i]) * R(i, j);
      S f = S(2.0 / vnorm2) * dot;
      for (int i = k; i < m; ++i)
        R(i, j) -= f * v[i];
    }
    for (int j = 0; j < m; ++j) {
      S dot = S(0);
      for (int i = k; i < m; ++i)
        dot += traits::conj(v[i]) * Q(j, i);
      S f = S(2.0 / vnorm2) * dot;
      for (int i = k; i < m; ++i)
        Q(j, i) -= f * traits::conj(v[i]);
    }
  }
  // clean the strict lower triangle
  for (int i = 1; i < m; ++i)
    for (int j = 0; j < std::min(i, n); ++j)
      R(i, j) = S(0);
  // normalize so diagonal entries of R are real and nonnegative
  for (int k = 0; k < steps; ++k) {
    S rkk = R(k, k);
    double a = std::abs(rkk);
    if (a == 0.0)
      continue;
    S phase = rkk / a;
    if (phase == S(1))
      continue;
    S pc = traits::conj(phase);
    for (int j = k; j < n; ++j)
      R(k, j) *= pc;
    for (int i = 0; i < m; ++i)
      Q(i, k) *= phase;
  }
  return {std::move(Q), std::move(R), std::move(perm)};
}

// ---------------------------------------------------------------------------
// Numerical kernel extraction
// ---------------------------------------------------------------------------

enum class KernelMethod { svd, qr };

/// Numerical null space of a real matrix. Values below eps, after scaling
/// so that sigma_max <= 1 whenever sigma_max > 1, count as zeros.
struct KernelResult {
  Matrix<double> kernel_basis;        // n x M_K, orthonormal columns
  std::vector<double> singular_values; // sigma (svd) or |R_ii| (qr), descending
  int M_K = 0;
  double max_zero_sv = 0.0;
  double min_nonzero_sv = std::numeric_limits<double>::infinity();
};

inline KernelResult kernel(const Matrix<double> &M, double eps,
                           KernelMethod method = KernelMethod::svd) {
  if (!(eps > 0.0))
    throw std::invalid_argument("kernel: eps must be > 0");
  const int n = M.cols();
  KernelResult out;
  if (method == KernelMethod::svd) {
    SvdResult<double> s = svd(M);
    out.singular_values = s.singular_values;
    double smax = s.singular_values.empty() ? 0.0 : s.singular_values.front();
    double tau = eps * std::max(1.0, smax);
    int k = static_cast<int>(s.singular_values.size());
    int rank = 0;
    for (double sv : s.singular_values)
      if (sv >= tau)
        ++rank;
    out.M_K = n - rank; // includes the n - k implicit zeros when rows < cols
    out.kernel_basis = Matrix<double>(n, out.M_K);
    for (int j = 0; j < out.M_K; ++j) {
      // trailing right singular vectors; columns beyond k would need
      // completion, but square/overdetermined inputs always have k = n
      int src = k - out.M_K + j;
      if (src < 0)
        throw std::invalid_argument("kernel: wide input not supported by svd mode");
      for (int r = 0; r < n; ++r)
        out.kernel_basis(r, j) = s.V(r, src);
    }
    for (int i = 0; i < k; ++i) {
      double sv = s.singular_values[i];
      if (sv < tau)
        out.max_zero_sv = std::max(out.max_zero_sv, sv);
      else
        out.min_nonzero_sv = std::min(out.min_nonzero_sv, sv);
    }
  } else {
    // QR of M^T with column pivoting: trailing columns of Q span ker(M)
    QrResult<double> f = qr(M.transposed(), true);
    const int k = std::min(M.rows(), n);
    std::vector<double> rdiag;
    for (int i = 0; i < k; ++i)
      rdiag.push_back(std::abs(f.R(i, i)));
    std::sort(rdiag.begin(), rdiag.end(), std::greater<>());
    out.singular_values = rdiag;
    double rmax = rdiag.empty() ? 0.0 : rdiag.front();
    double tau = eps * std::max(1.0, rmax);
    int rank = 0;
    for (double rv : rdiag)
      if (rv >= tau)
        ++rank;
    out.M_K = n - rank;
    out.kernel_basis = Matrix<double>(n, out.M_K);
    for (int j = 0; j < out.M_K; ++j)
      for (int r = 0; r < n; ++r)
        out.kernel_basis(r, j) = f.Q(r, rank + j);
    for (double rv : rdiag) {
      if (rv < tau)
        out.max_zero_sv = std::max(out.max_zero_sv, rv);
      else
        out.min_nonzero_sv = std::min(out.min_nonzero_sv, rv);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pseudoinverse application, LU solve, condition number
// ---------------------------------------------------------------------------

/// x = M^+ rhs via SVD with the same eps truncation rule as kernel().
/// Returns the least-squares solution; rhs outside range(M) leaves a
/// residual the caller can check.
inline std::vector<double> pseudo_apply(const Matrix<double> &M,
                                        const std::vector<double> &rhs,
                                        double eps = 1e-7) {
  if (static_cast<int>(rhs.size()) != M.rows())
    throw std::invalid_argument("pseudo_apply: rhs length mismatch");
  SvdResult<double> s = svd(M);
  double smax = s.singular_values.empty() ? 0.0 : s.singular_values.front();
  double tau = eps * std::max(1.0, smax);
  const int k = static_cast<int>(s.singular_values.size());
  std::vector<double> x(M.cols(), 0.0);
  for (int i = 0; i < k; ++i) {
    if (s.singular_values[i] < tau)
      continue;
    double ui_rhs = 0.0;
    for (int r = 0; r < M.rows(); ++r)
      ui_rhs += s.U(r, i) * rhs[r];
    double c = ui_rhs / s.singular_values[i];
    for (int r = 0; r < M.cols(); ++r)
      x[r] += c * s.V(r, i);
  }
  return x;
}

/// Partial-pivoted LU solve for a square system. Exactly singular input throws.
template <class S>
std::vector<S> lu_solve(Matrix<S> M, std::vector<S> rhs) {
  const int n = M.rows();
  if (M.cols() != n || static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("lu_solve: shape mismatch");
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(M(k, k));
    for (int i = k + 1; i < n; ++i)
      if (std::abs(M(i, k)) > best) {
        best = std::abs(M(i, k));
        piv = i;
      }
    if (best == 0.0)
      throw std::runtime_error("lu_solve: singular matrix (zero pivot at row " +
                               std::to_string(k) + ")");
    if (piv != k) {
      for (int j = 0; j < n; ++j)
        std::swap(M(k, j), M(piv, j));
      std::swap(rhs[k], rhs[piv]);
    }
    S inv_pivot = S(1) / M(k, k);
    for (int i = k + 1; i < n; ++i) {
      S f = M(i, k) * inv_pivot;
      if (f == S(0))
        continue;
      M(i, k) = f;
      for (int j = k + 1; j < n; ++j)
        M(i, j) -= f * M(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    S s = rhs[i];
    for (int j = i + 1; j < n; ++j)
      s -= M(i, j) * rhs[j];
    rhs[i] = s / M(i, i);
  }
  return rhs;
}

/// Spectral condition number sigma_max / sigma_min; +inf below 1e-300.
template <class S> double cond2(const Matrix<S> &M) {
  SvdResult<S> s = svd(M);
  if (s.singular_values.empty())
    throw std::invalid_argument("cond2: empty matrix");
  double smin = s.singular_values.back();
  if (smin < 1e-300)
    return std::numeric_limits<double>::infinity();
  return s.singular_values.front() / smin;
}

/// Cholesky factor (upper triangular R with M = R^T R) of an SPD matrix.
inline Matrix<double> cholesky_upper(const Matrix<double> &M) {
  const int n = M.rows();
  if (M.cols() != n)
    throw std::invalid_argument("cholesky_upper: matrix not square");
  Matrix<double> R(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = M(i, j);
      for (int k = 0; k < i; ++k)
        s -= R(k, i) * R(k, j);
      if (i == j) {
        if (s <= 0.0)
          throw std::runtime_error("cholesky_upper: matrix not positive definite");
        R(i, i) = std::sqrt(s);
      } else {
        R(i, j) = s / R(i, i);
      }
    }
  }
  return R;
}

/// Solves R^T y = b for upper-triangular R (forward substitution).
inline std::vector<double> solve_upper_transposed(const Matrix<double> &R,
                                                  std::vector<double> b) {
  const int n = R.rows();
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k)
      s -= R(k, i) * b[k];
    b[i] = s / R(i, i);
  }
  return b;
}

/// Solves R x = b for upper-triangular R (back substitution).
inline std::vector<double> solve_upper(const Matrix<double> &R, std::vector<double> b) {
  const int n = R.rows();
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k)
      s -= R(i, k) * b[k];
    b[i] = s / R(i, i);
  }
  return b;
}

} // namespace trefftz
