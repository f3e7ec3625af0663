#include "mpgsa/instances.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <vector>

namespace mpgsa {

namespace {

// Least squares restricted to the columns in `passive`.
Vector restricted_lsq(const Matrix& m, const Vector& d,
                      const std::vector<Index>& passive) {
  Matrix sub(m.rows(), static_cast<Index>(passive.size()));
  for (std::size_t j = 0; j < passive.size(); ++j)
    sub.col(static_cast<Index>(j)) = m.col(passive[j]);
  Vector s_sub = sub.completeOrthogonalDecomposition().solve(d);
  Vector s = Vector::Zero(m.cols());
  for (std::size_t j = 0; j < passive.size(); ++j)
    s(passive[j]) = s_sub(static_cast<Index>(j));
  return s;
}

}  // namespace

NnlsResult nnls_mixed_solve(const Matrix& U, const Vector& c,
                            const Vector& xbar, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("nnls_mixed_solve: tol <= 0");
  if (U.rows() != c.size() || U.rows() != xbar.size()) {
    throw std::invalid_argument("nnls_mixed_solve: dimension mismatch");
  }
  const Index n = U.cols();
  const double xx = xbar.squaredNorm();

  // Eliminate gamma: for fixed zeta the optimal gamma zeroes the component
  // of the residual along xbar.
  Matrix proj = Matrix::Identity(U.rows(), U.rows());
  if (xx > 0.0) proj -= xbar * xbar.transpose() / xx;
  const Matrix m = proj * U;
  const Vector d = -(proj * c);

  Vector zeta = Vector::Zero(n);
  std::vector<bool> is_passive(static_cast<std::size_t>(n), false);
  const double scale = std::max(1.0, m.norm() * std::max(1.0, d.norm()));
  const double dual_tol = tol * scale;
  const int max_outer = static_cast<int>(3 * n + 30);

  NnlsResult out;
  int it = 0;
  for (; it < max_outer; ++it) {
    Vector w = m.transpose() * (d - m * zeta);
    Index enter = -1;
    double best = dual_tol;
    for (Index j = 0; j < n; ++j) {
      if (!is_passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        enter = j;
      }
    }
    if (enter < 0) break;
    is_passive[static_cast<std::size_t>(enter)] = true;

    // Inner loop: keep the passive-set solution feasible.
    for (int inner = 0; inner <= n; ++inner) {
      std::vector<Index> passive;
      for (Index j = 0; j < n; ++j)
        if (is_passive[static_cast<std::size_t>(j)]) passive.push_back(j);
      Vector s = restricted_lsq(m, d, passive);
      bool feasible = true;
      for (Index j : passive) feasible = feasible && s(j) > 0.0;
      if (feasible) {
        zeta = s;
        break;
      }
      double step = 1.0;
      for (Index j : passive) {
        if (s(j) <= 0.0) step = std::min(step, zeta(j) / (zeta(j) - s(j)));
      }
      zeta += step * (s - zeta);
      for (Index j : passive) {
        if (zeta(j) <= tol * std::max(1.0, zeta.cwiseAbs().maxCoeff())) {
          zeta(j) = 0.0;
          is_passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }
  if (it == max_outer) {
    throw NumericalError("nnls_mixed_solve: active-set iteration cap reached");
  }

  out.zeta = zeta;
  out.gamma = xx > 0.0 ? -xbar.dot(U * zeta + c) / xx : 0.0;
  out.residual = (U * zeta + out.gamma * xbar + c).norm();
  const Vector grad = m.transpose() * (m * zeta - d);
  double kkt = 0.0;
  for (Index j = 0; j < n; ++j) {
    kkt = std::max(kkt, zeta(j) > 0.0 ? std::abs(grad(j))
                                      : std::max(0.0, -grad(j)));
  }
  out.kkt = kkt;
  out.iterations = it;
  return out;
}

}  // namespace mpgsa
