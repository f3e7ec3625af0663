#pragma once

// Reference computations used only by the tests. None of these call into
// the library's solver code; they are slow, simple and independent.

#include "mpgsa/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using mpgsa::Index;
using mpgsa::Matrix;
using mpgsa::Vector;

inline Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Orthonormal point via modified Gram-Schmidt (not the library's QR).
inline Matrix stiefel_point(Index n, Index p, std::uint64_t seed) {
  Matrix x = gaussian(n, p, seed);
  for (Index j = 0; j < p; ++j) {
    for (Index k = 0; k < j; ++k) x.col(j) -= x.col(k).dot(x.col(j)) * x.col(k);
    x.col(j).normalize();
  }
  return x;
}

/// Sum of the k largest |x_ij| by full sort.
inline double topk_sorted(const Matrix& x, Index k) {
  std::vector<double> a(x.data(), x.data() + x.size());
  for (double& v : a) v = std::abs(v);
  std::sort(a.begin(), a.end(), std::greater<double>());
  double s = 0.0;
  for (Index i = 0; i < k; ++i) s += a[static_cast<std::size_t>(i)];
  return s;
}

/// Central finite-difference directional derivative.
inline double central_difference(const std::function<double(const Matrix&)>& f,
                                 const Matrix& x, const Matrix& d,
                                 double h = 1e-6) {
  return (f(x + h * d) - f(x - h * d)) / (2.0 * h);
}

/// Largest generalized eigenvalue of (A, B), B positive definite.
inline double max_generalized_eigenvalue(const Matrix& a, const Matrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, b);
  return es.eigenvalues().maxCoeff();
}

/// ||B||_2 for symmetric B by power iteration.
inline double power_norm(const Matrix& b, int iters = 5000) {
  Vector v = Vector::Ones(b.rows()).normalized();
  double est = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vector w = b * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (std::abs(nw - est) <= 1e-15 * nw) return nw;
    est = nw;
  }
  return est;
}

struct NnlsBrute {
  Vector zeta;
  double gamma = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

/// min ||U zeta + gamma xbar + c||^2, zeta >= 0, by enumerating every
/// support of zeta (n <= 12).
inline NnlsBrute nnls_brute(const Matrix& u, const Vector& c,
                            const Vector& xbar) {
  const Index n = u.cols();
  NnlsBrute best;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<Index> s;
    for (Index j = 0; j < n; ++j)
      if (mask & (1u << j)) s.push_back(j);
    Matrix m(u.rows(), static_cast<Index>(s.size()) + 1);
    for (std::size_t j = 0; j < s.size(); ++j)
      m.col(static_cast<Index>(j)) = u.col(s[j]);
    m.col(m.cols() - 1) = xbar;
    const Vector sol = m.completeOrthogonalDecomposition().solve(-c);
    bool feasible = true;
    for (std::size_t j = 0; j < s.size(); ++j)
      feasible = feasible && sol(static_cast<Index>(j)) >= -1e-12;
    if (!feasible) continue;
    const double obj = (m * sol + c).squaredNorm();
    if (obj < best.objective - 1e-14) {
      best.objective = obj;
      best.zeta = Vector::Zero(n);
      for (std::size_t j = 0; j < s.size(); ++j)
        best.zeta(s[j]) = std::max(0.0, sol(static_cast<Index>(j)));
      best.gamma = sol(m.cols() - 1);
    }
  }
  return best;
}

/// Orthonormal basis (columns, vectorized n*p) of the tangent space at x.
inline Matrix tangent_basis(const Matrix& x) {
  const Index n = x.rows(), p = x.cols();
  // Null space of V -> vec(X^T V + V^T X) restricted to the upper triangle.
  Matrix c(p * (p + 1) / 2, n * p);
  Index row = 0;
  for (Index a = 0; a < p; ++a) {
    for (Index b = a; b < p; ++b, ++row) {
      for (Index j = 0; j < p; ++j) {
        for (Index i = 0; i < n; ++i) {
          double val = 0.0;
          if (j == b) val += x(i, a);
          if (j == a) val += x(i, b);
          c(row, j * n + i) = val;
        }
      }
    }
  }
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
  const Index rank = p * (p + 1) / 2;
  return svd.matrixV().rightCols(n * p - rank);
}

/// min_{v tangent} lam ||x + v||_1 + <w, v> + ||v||^2 / (2t) by ADMM in
/// tangent coordinates. Slow, independent of the dual formulation.
inline Matrix l1_subproblem_admm(const Matrix& x, const Matrix& w, double t,
                                 double lam, int iters = 200000,
                                 double tol = 1e-13) {
  const Index n = x.rows(), p = x.cols();
  const Matrix q = tangent_basis(x);
  const Vector xv = Eigen::Map<const Vector>(x.data(), n * p);
  const Vector wq = q.transpose() * Eigen::Map<const Vector>(w.data(), n * p);
  const double rho = 1.0 / t;
  Vector cc = Vector::Zero(q.cols());
  Vector y = xv, u = Vector::Zero(n * p);
  for (int it = 0; it < iters; ++it) {
    // c-update: (1/t + rho) c = -wq + rho Q^T (y - x - u)
    cc = (-wq + rho * q.transpose() * (y - xv - u)) / (1.0 / t + rho);
    const Vector qc = q * cc;
    const Vector z = xv + qc + u;
    Vector y_new = z;
    for (Index i = 0; i < z.size(); ++i) {
      const double a = std::abs(z(i)) - lam / rho;
      y_new(i) = a > 0 ? std::copysign(a, z(i)) : 0.0;
    }
    const double dual_res = rho * (y_new - y).norm();
    y = y_new;
    u += xv + qc - y;
    const double prim_res = (xv + qc - y).norm();
    if (prim_res < tol && dual_res < tol) break;
  }
  Vector v = q * cc;
  return Eigen::Map<Matrix>(v.data(), n, p);
}

}  // namespace oracle
