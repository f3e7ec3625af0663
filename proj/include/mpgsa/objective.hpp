#pragma once

// Oracles for the composite objective
//
//     F(x) = h1(x) - h2(x) + r(x) - f(x) / g(x)
//
// over a Stiefel manifold, plus the entrywise l1 / top-K machinery used by
// the sparse generalized eigenvalue models.

#include "mpgsa/core.hpp"
#include "mpgsa/manifold.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace mpgsa {

// --- h1: convex, Lipschitz, with an inexpensive prox ----------------------

class ProxCapableConvex {
 public:
  virtual ~ProxCapableConvex() = default;
  virtual double value(const Matrix& x) const = 0;
  /// argmin_y { h1(y) + ||y - z||^2 / (2 scale) }
  virtual Matrix prox(const Matrix& z, double scale) const = 0;
  /// Lipschitz constant w.r.t. the Frobenius norm on matrices of `size` entries.
  virtual double lipschitz(Index size) const = 0;
  /// Weight lambda when this is lambda * ||.||_1 (enables the Newton solver).
  virtual std::optional<double> l1_weight() const { return std::nullopt; }
  virtual bool is_zero() const { return false; }
};

class ZeroConvex final : public ProxCapableConvex {
 public:
  double value(const Matrix&) const override { return 0.0; }
  Matrix prox(const Matrix& z, double) const override { return z; }
  double lipschitz(Index) const override { return 0.0; }
  bool is_zero() const override { return true; }
};

class L1Norm final : public ProxCapableConvex {
 public:
  explicit L1Norm(double lambda);
  double value(const Matrix& x) const override;
  Matrix prox(const Matrix& z, double scale) const override;
  double lipschitz(Index size) const override;
  std::optional<double> l1_weight() const override { return lambda_; }
  bool is_zero() const override { return lambda_ == 0.0; }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

// --- h2: convex; optionally a finite max of smooth convex pieces ----------

/// One smooth piece psi_i of h2 = max_i psi_i, evaluated at a point.
/// For the top-K norm, `support` holds column-major linear indices of the
/// selected entries and `signs` their signs; psi(X) = lambda <signs, X_S>.
struct ActivePiece {
  double value = 0.0;
  Matrix gradient;
  std::vector<Index> support;
  std::vector<signed char> signs;
};

/// Thrown when active-piece enumeration exceeds its cap. Carries the pieces
/// found so far (the exact-max piece is always first).
class PieceCapExceeded : public std::runtime_error {
 public:
  PieceCapExceeded(std::vector<ActivePiece> partial, std::size_t cap);
  const std::vector<ActivePiece>& partial() const { return partial_; }

 private:
  std::vector<ActivePiece> partial_;
};

class SubgradientConvex {
 public:
  virtual ~SubgradientConvex() = default;
  virtual double value(const Matrix& x) const = 0;
  /// One element of the subdifferential, chosen deterministically.
  virtual Matrix subgradient(const Matrix& x) const = 0;
};

class FiniteMaxSmoothConvex : public SubgradientConvex {
 public:
  /// Pieces with psi_i(x) > h2(x) - eta; the exact-max piece comes first.
  virtual std::vector<ActivePiece> active_pieces(const Matrix& x, double eta,
                                                 std::size_t cap) const = 0;
};

class ZeroMax final : public FiniteMaxSmoothConvex {
 public:
  double value(const Matrix&) const override { return 0.0; }
  Matrix subgradient(const Matrix& x) const override {
    return Matrix::Zero(x.rows(), x.cols());
  }
  std::vector<ActivePiece> active_pieces(const Matrix& x, double,
                                         std::size_t) const override;
};

/// lambda * ||X||_(K): lambda times the sum of the K largest |x_ij|.
class TopKNorm final : public FiniteMaxSmoothConvex {
 public:
  TopKNorm(Index k, double lambda);
  double value(const Matrix& x) const override;
  Matrix subgradient(const Matrix& x) const override;
  std::vector<ActivePiece> active_pieces(const Matrix& x, double eta,
                                         std::size_t cap) const override;
  Index k() const { return k_; }
  double lambda() const { return lambda_; }

 private:
  Index k_;
  double lambda_;
};

// --- r and g: continuously differentiable ---------------------------------

class SmoothTerm {
 public:
  virtual ~SmoothTerm() = default;
  virtual double value(const Matrix& x) const = 0;
  virtual Matrix gradient(const Matrix& x) const = 0;
};

class ZeroSmooth final : public SmoothTerm {
 public:
  double value(const Matrix&) const override { return 0.0; }
  Matrix gradient(const Matrix& x) const override {
    return Matrix::Zero(x.rows(), x.cols());
  }
};

class ConstantSmooth final : public SmoothTerm {
 public:
  explicit ConstantSmooth(double c) : c_(c) {}
  double value(const Matrix&) const override { return c_; }
  Matrix gradient(const Matrix& x) const override {
    return Matrix::Zero(x.rows(), x.cols());
  }

 private:
  double c_;
};

// --- f: nonnegative with weakly convex square root -------------------------

class SqrtWeaklyConvexTerm {
 public:
  virtual ~SqrtWeaklyConvexTerm() = default;
  virtual double value(const Matrix& x) const = 0;
  /// One element of the subdifferential; exactly zero wherever f(x) = 0.
  virtual Matrix subgradient(const Matrix& x) const = 0;
  /// Weak-convexity modulus of sqrt(f) (informational).
  virtual double sqrt_weak_convexity() const = 0;
};

class ZeroSqrtWeaklyConvex final : public SqrtWeaklyConvexTerm {
 public:
  double value(const Matrix&) const override { return 0.0; }
  Matrix subgradient(const Matrix& x) const override {
    return Matrix::Zero(x.rows(), x.cols());
  }
  double sqrt_weak_convexity() const override { return 0.0; }
};

/// tr(X^T M X) with M symmetric. Serves as g (M positive definite), as r,
/// and as f when M is PSD (then sqrt(f) = ||M^{1/2} X||_F is convex).
class TraceQuadratic final : public SmoothTerm, public SqrtWeaklyConvexTerm {
 public:
  explicit TraceQuadratic(Matrix m);
  double value(const Matrix& x) const override;
  Matrix gradient(const Matrix& x) const override;
  Matrix subgradient(const Matrix& x) const override;
  double sqrt_weak_convexity() const override { return 0.0; }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

// --- the composite problem -------------------------------------------------

struct CompositeProblem {
  Stiefel manifold;
  std::shared_ptr<const ProxCapableConvex> h1;
  std::shared_ptr<const SubgradientConvex> h2;
  std::shared_ptr<const SmoothTerm> r;
  std::shared_ptr<const SmoothTerm> g;
  std::shared_ptr<const SqrtWeaklyConvexTerm> f;

  /// h2 as a finite max of smooth pieces, or nullptr.
  const FiniteMaxSmoothConvex* finite_max_h2() const {
    return dynamic_cast<const FiniteMaxSmoothConvex*>(h2.get());
  }
};

struct ObjectiveParts {
  double h1 = 0.0;
  double h2 = 0.0;
  double r = 0.0;
  double f = 0.0;
  double g = 1.0;
  double total() const { return h1 - h2 + r - f / g; }
};

/// Component values at x. Throws AssumptionViolation when g(x) <= 0.
ObjectiveParts eval_parts(const CompositeProblem& problem, const Matrix& x);
double eval_F(const CompositeProblem& problem, const Matrix& x);

/// grad r(x) + f(x) grad g(x) / g(x)^2 - y / g(x): the part of the
/// linearization shared by every h2 piece.
Matrix smooth_linearization(const CompositeProblem& problem, const Matrix& x,
                            const Matrix& y);

/// w = grad r(x) + f(x) grad g(x) / g(x)^2 - y / g(x) - z.
Matrix linearization_vector(const CompositeProblem& problem, const Matrix& x,
                            const Matrix& y, const Matrix& z);

// --- entrywise norms ---------------------------------------------------------

double l1_value(const Matrix& x, double lambda);
/// Soft threshold sign(z) max(|z| - scale, 0); throws on negative scale.
Matrix l1_prox(const Matrix& z, double scale);

/// lambda * (sum of the k largest |x_ij|). Throws unless 1 <= k <= size.
double topk_value(const Matrix& x, Index k, double lambda);
/// lambda sign(x_ij) on the k largest-magnitude entries (ties to the lowest
/// column-major index, zero entries contribute 0), zero elsewhere.
Matrix topk_subgradient(const Matrix& x, Index k, double lambda);
/// Pieces of the top-K norm within eta of the max; see TopKNorm.
std::vector<ActivePiece> topk_active_pieces(const Matrix& x, Index k,
                                            double lambda, double eta,
                                            std::size_t cap = 64);

/// Column-major indices sorted by decreasing |x|, ties by increasing index.
std::vector<Index> magnitude_order(const Matrix& x);

// --- Moreau envelope ---------------------------------------------------------

/// (z - prox_{t h1}(z)) / t; 1/t-Lipschitz.
Matrix moreau_envelope_grad(const ProxCapableConvex& h1, const Matrix& z,
                            double t);
/// min_y h1(y) + ||y - z||^2 / (2t)
double moreau_envelope_value(const ProxCapableConvex& h1, const Matrix& z,
                             double t);

}  // namespace mpgsa
