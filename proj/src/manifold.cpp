#include "mpgsa/manifold.hpp"

#include <Eigen/SVD>

#include <iostream>
#include <random>

namespace mpgsa {

Stiefel::Stiefel(Index n, Index p) : n_(n), p_(p) {
  if (p < 1 || n < p) {
    throw std::invalid_argument("Stiefel: need 1 <= p <= n");
  }
}

Matrix Stiefel::project(const Matrix& x, const Matrix& w) const {
  require_shape(x, n_, p_, "Stiefel::project point");
  require_shape(w, n_, p_, "Stiefel::project direction");
  return w - x * sym(x.transpose() * w);
}

Matrix Stiefel::retract(const Matrix& x, const Matrix& v) const {
  require_shape(x, n_, p_, "Stiefel::retract point");
  require_shape(v, n_, p_, "Stiefel::retract direction");
  return polar_factor(x + v);
}

Matrix Stiefel::random_point(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n_, p_);
  for (Index j = 0; j < p_; ++j)
    for (Index i = 0; i < n_; ++i) g(i, j) = normal(rng);

  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n_, p_);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < p_; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

double Stiefel::feasibility_error(const Matrix& x) const {
  require_shape(x, n_, p_, "Stiefel::feasibility_error");
  return (x.transpose() * x - Matrix::Identity(p_, p_)).norm();
}

double Stiefel::tangency_error(const Matrix& x, const Matrix& v) const {
  return normal_constraint_apply(x, v).norm();
}

Matrix normal_constraint_apply(const Matrix& x, const Matrix& v) {
  require_shape(v, x.rows(), x.cols(), "normal_constraint_apply");
  Matrix xtv = x.transpose() * v;
  return xtv + xtv.transpose();
}

Matrix normal_constraint_adjoint(const Matrix& x, const Matrix& lambda) {
  require_shape(lambda, x.cols(), x.cols(), "normal_constraint_adjoint");
  const double asym = (lambda - lambda.transpose()).norm();
  if (asym > 1e-12) {
    std::cerr << "warning: normal_constraint_adjoint symmetrising multiplier"
              << " (asymmetry " << asym << ")\n";
    return 2.0 * x * sym(lambda);
  }
  return 2.0 * x * lambda;
}

Matrix polar_factor(const Matrix& m, double min_singular) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) < min_singular) {
    throw NumericalError("polar_factor: matrix is rank deficient");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix retract_polar_closed_form(const Matrix& x, const Matrix& v) {
  const Index p = x.cols();
  Matrix gram = Matrix::Identity(p, p) + v.transpose() * v;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  Matrix inv_sqrt = eig.eigenvectors() *
                    eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                    eig.eigenvectors().transpose();
  return (x + v) * inv_sqrt;
}

}  // namespace mpgsa
