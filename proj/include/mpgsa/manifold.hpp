#pragma once

#include "mpgsa/core.hpp"

namespace mpgsa {

/// The Stiefel manifold St(n, p) = { X in R^{n x p} : X^T X = I_p }.
///
/// Points and tangent vectors are plain n x p matrices; the predicates
/// feasibility_error() and tangency_error() check membership.
class Stiefel {
 public:
  Stiefel(Index n, Index p);

  Index n() const { return n_; }
  Index p() const { return p_; }
  /// np - p(p+1)/2
  Index dimension() const { return n_ * p_ - p_ * (p_ + 1) / 2; }

  /// W - X sym(X^T W).
  Matrix project(const Matrix& x, const Matrix& w) const;

  /// Polar retraction: orthonormal polar factor of X + V via thin SVD.
  /// Throws NumericalError when X + V is (numerically) rank deficient.
  Matrix retract(const Matrix& x, const Matrix& v) const;

  /// Orthonormal factor of an n x p standard Gaussian matrix, with the
  /// Householder-QR sign convention diag(R) >= 0. Deterministic per seed.
  Matrix random_point(std::uint64_t seed) const;

  /// ||X^T X - I||_F
  double feasibility_error(const Matrix& x) const;
  /// ||X^T V + V^T X||_F
  double tangency_error(const Matrix& x, const Matrix& v) const;

  bool is_feasible(const Matrix& x, double tol = 1e-10) const {
    return feasibility_error(x) <= tol;
  }

 private:
  Index n_;
  Index p_;
};

/// A_X(V) = X^T V + V^T X. Its kernel is the tangent space at X.
Matrix normal_constraint_apply(const Matrix& x, const Matrix& v);

/// A_X^*(L) = 2 X L, the adjoint of normal_constraint_apply under the
/// Frobenius pairing. A non-symmetric L is symmetrised first (a warning is
/// written to stderr when the asymmetry exceeds 1e-12).
Matrix normal_constraint_adjoint(const Matrix& x, const Matrix& lambda);

/// U W^T for the thin SVD U S W^T of m.
Matrix polar_factor(const Matrix& m, double min_singular = 1e-12);

/// (X + V)(I + V^T V)^{-1/2}; equals the polar retraction for tangent V.
/// Kept as an independent cross-check of Stiefel::retract.
Matrix retract_polar_closed_form(const Matrix& x, const Matrix& v);

}  // namespace mpgsa
