#include "mpgsa/instances.hpp"

#include "mpgsa/manifold.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mpgsa {

// --- SGEP problems ------------------------------------------------------------

void SgepInstance::validate() {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw InvalidInstance("SGEP: A and B must be square of equal size");
  if (p < 1 || p > A.rows()) throw InvalidInstance("SGEP: need 1 <= p <= n");
  if (lambda < 0.0) throw InvalidInstance("SGEP: lambda must be >= 0");
  if (K && (*K < 1 || *K > A.rows() * p))
    throw InvalidInstance("SGEP: K must satisfy 1 <= K <= np");
  const double scale_a = std::max(1.0, A.cwiseAbs().maxCoeff());
  const double scale_b = std::max(1.0, B.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale_a)
    throw InvalidInstance("SGEP: A is not symmetric");
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale_b)
    throw InvalidInstance("SGEP: B is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> eig_b(B, Eigen::EigenvaluesOnly);
  if (!(eig_b.eigenvalues().minCoeff() > 0.0))
    throw InvalidInstance("SGEP: B is not positive definite");
  Eigen::SelfAdjointEigenSolver<Matrix> eig_a(A, Eigen::EigenvaluesOnly);
  if (eig_a.eigenvalues().minCoeff() < -1e-10 * scale_a)
    throw InvalidInstance("SGEP: A is not positive semidefinite");
  if (specnorm_B <= 0.0) specnorm_B = eig_b.eigenvalues().maxCoeff();
}

CompositeProblem build_sgep(SgepInstance instance) {
  instance.validate();
  const Index n = instance.A.rows();
  std::shared_ptr<const SubgradientConvex> h2;
  if (instance.K) h2 = std::make_shared<TopKNorm>(*instance.K, instance.lambda);
  else h2 = std::make_shared<ZeroMax>();
  return CompositeProblem{
      Stiefel(n, instance.p),
      std::make_shared<L1Norm>(instance.lambda),
      std::move(h2),
      std::make_shared<ZeroSmooth>(),
      std::make_shared<TraceQuadratic>(instance.B),
      std::make_shared<TraceQuadratic>(instance.A)};
}

StepsizeRule sgep_stepsize_rule(const SgepInstance& instance) {
  auto a = std::make_shared<const Matrix>(instance.A);
  auto b = std::make_shared<const Matrix>(instance.B);
  const double specnorm = instance.specnorm_B;
  if (!(specnorm > 0.0))
    throw InvalidInstance("sgep_stepsize_rule: validate the instance first");
  return [a, b, specnorm](const Matrix& x) {
    // Clamping happens in SolverConfig::stepsize.
    return stepsize_sgep(x, *a, *b, specnorm, 0.0,
                         std::numeric_limits<double>::infinity());
  };
}

// --- four-class discriminant data -------------------------------------------

SgepInstance random_sgep(Index n, Index p, double lambda,
                         std::optional<Index> K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n), h(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) h(i, j) = normal(rng);
  SgepInstance out;
  out.A = g * g.transpose() / double(n);
  out.B = h * h.transpose() / double(n) + Matrix::Identity(n, n);
  out.A = sym(out.A);
  out.B = sym(out.B);
  out.lambda = lambda;
  out.K = K;
  out.p = p;
  out.validate();
  return out;
}

Matrix sfda_covariance(const SfdaOptions& options) {
  const Index n = options.features;
  const Index block = n / options.blocks;
  Matrix sigma = Matrix::Zero(n, n);
  for (Index b = 0; b < options.blocks; ++b)
    for (Index i = 0; i < block; ++i)
      for (Index j = 0; j < block; ++j)
        sigma(b * block + i, b * block + j) =
            std::pow(options.correlation, static_cast<double>(std::abs(i - j)));
  return sigma;
}

Scatter scatter_matrices(const Matrix& samples, const std::vector<int>& labels,
                         int classes) {
  const Index n_samples = samples.rows();
  if (static_cast<Index>(labels.size()) != n_samples)
    throw std::invalid_argument("scatter_matrices: label count mismatch");
  const Index dim = samples.cols();
  Matrix means = Matrix::Zero(classes, dim);
  std::vector<Index> counts(static_cast<std::size_t>(classes), 0);
  for (Index s = 0; s < n_samples; ++s) {
    means.row(labels[s]) += samples.row(s);
    ++counts[static_cast<std::size_t>(labels[s])];
  }
  for (int c = 0; c < classes; ++c) means.row(c) /= double(counts[c]);
  const Eigen::RowVectorXd overall = samples.colwise().mean();

  Scatter out;
  out.between = Matrix::Zero(dim, dim);
  for (int c = 0; c < classes; ++c) {
    Eigen::RowVectorXd diff = means.row(c) - overall;
    out.between += double(counts[c]) * diff.transpose() * diff;
  }
  out.between /= double(n_samples);

  Matrix centered = samples;
  for (Index s = 0; s < n_samples; ++s) centered.row(s) -= means.row(labels[s]);
  out.within = centered.transpose() * centered / double(n_samples - classes);
  // Symmetrise away rounding so downstream checks see exact symmetry.
  out.between = sym(out.between);
  out.within = sym(out.within);
  return out;
}

SfdaDataset gen_sfda(std::uint64_t seed, const SfdaOptions& options) {
  if (options.features % options.blocks != 0)
    throw std::invalid_argument("gen_sfda: features must divide into blocks");
  const Index n = options.features;
  const Index block = n / options.blocks;
  SfdaOptions block_opts = options;
  block_opts.features = block;
  block_opts.blocks = 1;
  const Matrix chol = sfda_covariance(block_opts).llt().matrixL();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto class_mean = [&](int c) {
    Vector mu = Vector::Zero(n);
    const double level = double(c) / double(options.classes - 1);
    for (Index j = 1; j < std::min(options.signal_features, n); j += 2)
      mu(j) = level;
    return mu;
  };
  auto draw = [&](Index per_class, Matrix& out, std::vector<int>& labels) {
    out.resize(per_class * options.classes, n);
    labels.assign(static_cast<std::size_t>(out.rows()), 0);
    Vector noise(block);
    for (int c = 0; c < options.classes; ++c) {
      const Vector mu = class_mean(c);
      for (Index s = 0; s < per_class; ++s) {
        const Index row = c * per_class + s;
        labels[static_cast<std::size_t>(row)] = c;
        for (Index b = 0; b < options.blocks; ++b) {
          for (Index j = 0; j < block; ++j) noise(j) = normal(rng);
          out.row(row).segment(b * block, block) =
              (mu.segment(b * block, block) + chol * noise).transpose();
        }
      }
    }
  };

  SfdaDataset data;
  data.seed = seed;
  draw(options.train_per_class, data.train, data.train_labels);
  draw(options.test_per_class, data.test, data.test_labels);
  Scatter sc = scatter_matrices(data.train, data.train_labels,
                                static_cast<int>(options.classes));
  data.A = std::move(sc.between);
  data.B = std::move(sc.within);
  data.B.diagonal().array() += 1e-8 * data.B.trace() / double(n);
  return data;
}

double nearest_centroid_accuracy(const Matrix& train,
                                 const std::vector<int>& train_labels,
                                 const Matrix& test,
                                 const std::vector<int>& test_labels,
                                 const Matrix& solution) {
  if (solution.cols() == 0 || solution.norm() == 0.0)
    throw std::invalid_argument("nearest_centroid_accuracy: empty solution");
  if (solution.rows() != train.cols() || solution.rows() != test.cols())
    throw std::invalid_argument("nearest_centroid_accuracy: dimension mismatch");

  Eigen::ColPivHouseholderQR<Matrix> qr(solution);
  const Index rank = qr.rank();
  if (rank == 0)
    throw std::invalid_argument("nearest_centroid_accuracy: rank-zero solution");
  const Matrix basis =
      (qr.householderQ() * Matrix::Identity(solution.rows(), rank));
  const Matrix train_proj = train * basis;
  const Matrix test_proj = test * basis;

  const int classes =
      1 + *std::max_element(train_labels.begin(), train_labels.end());
  Matrix centroids = Matrix::Zero(classes, rank);
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (Index s = 0; s < train_proj.rows(); ++s) {
    centroids.row(train_labels[s]) += train_proj.row(s);
    counts[static_cast<std::size_t>(train_labels[s])] += 1.0;
  }
  for (int c = 0; c < classes; ++c)
    if (counts[c] > 0.0) centroids.row(c) /= counts[c];

  Index correct = 0;
  for (Index s = 0; s < test_proj.rows(); ++s) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < classes; ++c) {
      if (counts[c] == 0.0) continue;
      const double d = (test_proj.row(s) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best == test_labels[static_cast<std::size_t>(s)]) ++correct;
  }
  return double(correct) / double(test_proj.rows());
}

double nearest_centroid_accuracy(const SfdaDataset& data,
                                 const Matrix& solution) {
  return nearest_centroid_accuracy(data.train, data.train_labels, data.test,
                                   data.test_labels, solution);
}

double sparsity(const Matrix& x, double rel_threshold) {
  if (x.size() == 0) return 0.0;
  const double cutoff = rel_threshold * x.cwiseAbs().maxCoeff();
  return double((x.array().abs() < cutoff).count()) / double(x.size());
}

// --- critical-point instances -----------------------------------------------

SgepInstance CriticalInstanceBundle::instance() const {
  SgepInstance inst;
  inst.A = zeta.asDiagonal();
  inst.B = zeta_tilde.asDiagonal();
  inst.lambda = lambda;
  inst.K = K;
  inst.p = 1;
  inst.specnorm_B = zeta_tilde.maxCoeff();
  return inst;
}

namespace {

CriticalInstanceBundle construct_once(Index n, Index K, double lambda,
                                      std::uint64_t stream) {
  std::mt19937_64 rng(stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(1.0, 10.0);

  std::vector<double> xi(static_cast<std::size_t>(K));
  for (double& v : xi) v = normal(rng);
  std::stable_sort(xi.begin(), xi.end(),
                   [](double a, double b) { return std::abs(a) > std::abs(b); });

  Vector xbar = Vector::Zero(n);
  for (Index i = 0; i < K; ++i) {
    const double v = xi[static_cast<std::size_t>(i)];
    xbar(i) = v + (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
  }
  xbar(K) = xbar(K - 1);
  xbar(K + 1) = xbar(K - 1);
  // Put the point on the sphere; the three-way tie is preserved exactly.
  xbar /= xbar.norm();

  Vector zeta_tilde(n);
  for (Index i = 0; i < n; ++i) zeta_tilde(i) = uniform(rng);

  // -grad(f/g)(xbar) = U zeta for f = x^T Diag(zeta) x, g = x^T B x.
  const Vector bx = zeta_tilde.cwiseProduct(xbar);
  const double theta = xbar.dot(bx);
  Matrix U = 2.0 * bx * (xbar.cwiseProduct(xbar)).transpose() / (theta * theta);
  U.diagonal() -= 2.0 * xbar / theta;

  // w1 in lambda d||.||_1(xbar) (0 on zeros), w2 the top-K selection.
  const Matrix xmat = xbar;
  const Vector w1 = lambda * xbar.unaryExpr([](double v) {
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  });
  const Vector w2 = topk_subgradient(xmat, K, lambda);
  const NnlsResult nnls = nnls_mixed_solve(U, w1 - w2, xbar, 1e-14);

  CriticalInstanceBundle bundle;
  bundle.zeta = nnls.zeta;
  bundle.zeta_tilde = zeta_tilde;
  bundle.xbar = xbar;
  bundle.lambda = lambda;
  bundle.K = K;
  bundle.nnls_residual = nnls.residual;
  bundle.gamma = nnls.gamma;
  bundle.global_opt = (-nnls.zeta.cwiseQuotient(zeta_tilde)).minCoeff();
  return bundle;
}

}  // namespace

CriticalInstanceBundle gen_critical_instance(Index n, Index K, double lambda,
                                             std::uint64_t seed) {
  if (K < 1 || n < K + 3)
    throw std::invalid_argument("gen_critical_instance: need n >= K + 3");
  if (!(lambda > 0.0))
    throw std::invalid_argument("gen_critical_instance: lambda must be > 0");
  constexpr int kAttempts = 10;
  double last = 0.0;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const std::uint64_t stream =
        attempt == 0 ? seed : mix_seed(seed, static_cast<std::uint64_t>(attempt));
    CriticalInstanceBundle b = construct_once(n, K, lambda, stream);
    if (b.nnls_residual <= 1e-8) {
      b.seed = seed;
      b.attempts = attempt + 1;
      return b;
    }
    last = b.nnls_residual;
  }
  throw ConstructionFailure("gen_critical_instance: certificate residual " +
                            std::to_string(last) + " after 10 attempts");
}

Matrix perturbed_start(const CriticalInstanceBundle& bundle,
                       std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0xB37A));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const double beta = uniform(rng);
  Matrix x0 = (bundle.xbar.array() + 0.01 * beta).matrix();
  return x0 / x0.norm();
}

}  // namespace mpgsa
