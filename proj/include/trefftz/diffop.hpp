#pragma once

#include "basis.hpp"
#include "geometry.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace trefftz {

/// One term alpha(x) D^d of a linear differential operator. Constant
/// coefficients are tagged so leading_part() can recognize them.
struct DiffTerm {
  MultiIndex derivative{0, 0};
  bool is_constant = true;
  double constant_value = 0.0;
  std::function<double(Vec2)> coefficient; // used when !is_constant

  double coeff_at(const Vec2 &x) const {
    return is_constant ? constant_value : coefficient(x);
  }
};

/// Linear differential operator L = sum_j alpha_j(x) D^j with real
/// coefficients, sampled at quadrature points only.
struct DiffOp {
  int dim = 2;
  std::vector<DiffTerm> terms;

  DiffOp() = default;
  DiffOp(int dimension, std::vector<DiffTerm> t) : dim(dimension), terms(std::move(t)) {
    if (terms.empty())
      throw std::invalid_argument("DiffOp: needs at least one term");
    for (std::size_t a = 0; a < terms.size(); ++a)
      for (std::size_t b = a + 1; b < terms.size(); ++b)
        if (terms[a].derivative == terms[b].derivative)
          throw std::invalid_argument("DiffOp: duplicate multi-index");
  }

  int max_order() const {
    int mo = 0;
    for (const DiffTerm &t : terms)
      mo = std::max(mo, order(t.derivative));
    return mo;
  }

  bool all_constant() const {
    for (const DiffTerm &t : terms)
      if (!t.is_constant)
        return false;
    return true;
  }
};

inline DiffTerm constant_term(MultiIndex d, double value) {
  DiffTerm t;
  t.derivative = d;
  t.is_constant = true;
  t.constant_value = value;
  return t;
}

inline DiffTerm variable_term(MultiIndex d, std::function<double(Vec2)> coeff) {
  DiffTerm t;
  t.derivative = d;
  t.is_constant = false;
  t.coefficient = std::move(coeff);
  return t;
}

/// (L phi_j)(point) for the scaled monomial basis.
inline double apply_to_basis(const DiffOp &op, const ElementBasis &basis, int j,
                             const Vec2 &point) {
  if (op.dim != basis.dim)
    throw std::invalid_argument("apply_to_basis: dimension mismatch");
  double s = 0.0;
  for (const DiffTerm &t : op.terms)
    s += t.coeff_at(point) * eval_deriv(basis, j, t.derivative, point);
  return s;
}

/// Constant-coefficient leading part: keeps the terms of maximal total
/// order with coefficient +1. When those terms already have constant
/// coefficients and nothing of lower order exists, the operator is its
/// own leading part (signs included).
inline DiffOp leading_part(const DiffOp &op, int p) {
  int mo = op.max_order();
  if (p < mo)
    throw std::invalid_argument("leading_part: p below operator order");
  bool top_constant = true;
  bool has_lower = false;
  for (const DiffTerm &t : op.terms) {
    if (order(t.derivative) == mo) {
      if (!t.is_constant)
        top_constant = false;
    } else {
      has_lower = true;
    }
  }
  if (top_constant && !has_lower)
    return op;
  std::vector<DiffTerm> kept;
  for (const DiffTerm &t : op.terms)
    if (order(t.derivative) == mo)
      kept.push_back(constant_term(t.derivative, 1.0));
  return DiffOp(op.dim, std::move(kept));
}

// Built-in operators for the shipped problems.

inline DiffOp laplace_op() {
  return DiffOp(2, {constant_term({2, 0}, -1.0), constant_term({0, 2}, -1.0)});
}

inline DiffOp helmholtz_op(double omega) {
  return DiffOp(2, {constant_term({2, 0}, -1.0), constant_term({0, 2}, -1.0),
                    constant_term({0, 0}, -omega * omega)});
}

inline DiffOp advection_op(std::function<double(Vec2)> bx, std::function<double(Vec2)> by) {
  return DiffOp(2, {variable_term({1, 0}, std::move(bx)), variable_term({0, 1}, std::move(by))});
}

inline DiffOp identity_op(int dim = 2) {
  return DiffOp(dim, {constant_term({0, 0}, 1.0)});
}

inline DiffOp zero_op(int dim = 2) {
  return DiffOp(dim, {constant_term({0, 0}, 0.0)});
}

inline DiffOp helmholtz_1d_op(double omega) {
  return DiffOp(1, {constant_term({2, 0}, -1.0), constant_term({0, 0}, -omega * omega)});
}

} // namespace trefftz
