#pragma once

// Sparse generalized eigenvalue instances:
//
//   l1 model:       min  lambda ||X||_1 - tr(X^T A X) / tr(X^T B X)
//   partial-l1:     min  lambda ||X||_1 - lambda ||X||_(K) - tr(X^T A X) / tr(X^T B X)
//
// over St(n, p), plus the two synthetic data generators: a four-class
// Gaussian discriminant dataset and a constructed instance with a certified
// critical (but not lifted B-stationary) point.

#include "mpgsa/objective.hpp"
#include "mpgsa/solvers.hpp"

#include <optional>
#include <vector>

namespace mpgsa {

class InvalidInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConstructionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SgepInstance {
  Matrix A;  // symmetric PSD
  Matrix B;  // symmetric PD
  double lambda = 0.0;
  std::optional<Index> K;  // top-K count for the partial-l1 model
  Index p = 1;
  double specnorm_B = 0.0;  // filled by validate() when zero

  /// Checks the symmetry / definiteness invariants with a dense
  /// eigen-decomposition and caches ||B||_2. Throws InvalidInstance.
  void validate();
};

/// h1 = lambda ||.||_1, h2 = lambda ||.||_(K) (or zero), f = tr(X^T A X),
/// g = tr(X^T B X), r = 0.
CompositeProblem build_sgep(SgepInstance instance);

/// The adaptive stepsize rule tr(X^T B X)^2 / (tr(X^T A X) ||B||_2).
StepsizeRule sgep_stepsize_rule(const SgepInstance& instance);

/// Random pencil: A = G G^T / n (PSD), B = H H^T / n + I (PD), with G, H
/// standard Gaussian n x n. Deterministic per seed.
SgepInstance random_sgep(Index n, Index p, double lambda,
                         std::optional<Index> K, std::uint64_t seed);

struct SfdaOptions {
  Index features = 500;
  Index classes = 4;
  Index train_per_class = 250;
  Index test_per_class = 500;
  Index blocks = 5;
  double correlation = 0.8;
  /// Class i has mean (i-1)/(classes-1) on features 2, 4, ..., this (1-based).
  Index signal_features = 40;
};

struct SfdaDataset {
  Matrix train;  // samples x features
  std::vector<int> train_labels;
  Matrix test;
  std::vector<int> test_labels;
  Matrix A;  // between-class scatter
  Matrix B;  // within-class scatter (with a small ridge)
  std::uint64_t seed = 0;
};

SfdaDataset gen_sfda(std::uint64_t seed, const SfdaOptions& options = {});

/// Block-diagonal covariance with blocks (correlation^{|j - j'|}).
Matrix sfda_covariance(const SfdaOptions& options);

struct Scatter {
  Matrix between;  // sum_i N_i (mu_i - mu)(mu_i - mu)^T / N
  Matrix within;   // sum_i sum_{x in i} (x - mu_i)(x - mu_i)^T / (N - classes)
};
Scatter scatter_matrices(const Matrix& samples, const std::vector<int>& labels,
                         int classes);

/// Projects train/test samples onto span(X) and classifies each test sample
/// by its nearest projected class centroid. Returns the accuracy.
double nearest_centroid_accuracy(const Matrix& train,
                                 const std::vector<int>& train_labels,
                                 const Matrix& test,
                                 const std::vector<int>& test_labels,
                                 const Matrix& solution);
double nearest_centroid_accuracy(const SfdaDataset& data,
                                 const Matrix& solution);

/// Fraction of entries with |x_ij| < rel_threshold * max |x|.
double sparsity(const Matrix& x, double rel_threshold = 1e-5);

struct NnlsResult {
  Vector zeta;
  double gamma = 0.0;
  double residual = 0.0;  // ||U zeta + gamma xbar + c||
  double kkt = 0.0;       // first-order optimality violation
  int iterations = 0;
};

/// min ||U zeta + gamma xbar + c||^2 subject to zeta >= 0, gamma free.
/// The free variable is eliminated by projecting onto xbar's orthogonal
/// complement; the rest is a Lawson-Hanson active-set solve. Throws
/// NumericalError when the iteration cap is hit.
NnlsResult nnls_mixed_solve(const Matrix& U, const Vector& c,
                            const Vector& xbar, double tol = 1e-12);

struct CriticalInstanceBundle {
  Vector zeta;        // A = Diag(zeta)
  Vector zeta_tilde;  // B = Diag(zeta_tilde)
  Vector xbar;        // unit-norm certified critical point
  double lambda = 0.0;
  Index K = 0;
  double global_opt = 0.0;
  double nnls_residual = 0.0;
  double gamma = 0.0;  // normal-space coefficient of the certificate
  std::uint64_t seed = 0;
  int attempts = 1;

  SgepInstance instance() const;
};

/// Builds the partial-l1 instance (p = 1) with a point xbar that is critical
/// but not lifted B-stationary. Resamples up to 10 times when the
/// certificate residual exceeds 1e-8, then throws ConstructionFailure.
CriticalInstanceBundle gen_critical_instance(Index n, Index K, double lambda,
                                             std::uint64_t seed);

/// xbar + 0.01 beta 1_n pulled back to the sphere, beta ~ U[-1, 1].
Matrix perturbed_start(const CriticalInstanceBundle& bundle,
                       std::uint64_t seed);

}  // namespace mpgsa
