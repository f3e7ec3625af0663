#include "mpgsa/instances.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace mpgsa;

TEST(Sgep, ValidateRejectsBadPencils) {
  SgepInstance inst = random_sgep(6, 2, 0.1, std::nullopt, 1);
  EXPECT_NEAR(inst.specnorm_B, oracle::power_norm(inst.B), 1e-9);

  SgepInstance asym = inst;
  asym.A(0, 1) += 1e-3;
  EXPECT_THROW(asym.validate(), InvalidInstance);
  SgepInstance indef = inst;
  indef.B = -indef.B;
  indef.specnorm_B = 0.0;
  EXPECT_THROW(indef.validate(), InvalidInstance);
  SgepInstance bad_k = inst;
  bad_k.K = 100;
  EXPECT_THROW(bad_k.validate(), InvalidInstance);
}

TEST(Sgep, RandomPencilIsSeeded) {
  const auto a = random_sgep(5, 1, 0.0, std::nullopt, 3);
  const auto b = random_sgep(5, 1, 0.0, std::nullopt, 3);
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.B, b.B);
}

TEST(Nnls, MatchesBruteForce) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const Matrix u = oracle::gaussian(9, 6, s);
    const Vector c = oracle::gaussian(9, 1, s + 100);
    const Vector xbar = oracle::gaussian(9, 1, s + 200);
    const NnlsResult r = nnls_mixed_solve(u, c, xbar);
    const auto ref = oracle::nnls_brute(u, c, xbar);
    EXPECT_NEAR(r.residual * r.residual, ref.objective,
                1e-9 * std::max(1.0, ref.objective));
    EXPECT_LE((r.zeta - ref.zeta).norm(), 1e-6);
    EXPECT_GE(r.zeta.minCoeff(), 0.0);
    EXPECT_LE(r.kkt, 1e-8);
  }
}

TEST(Nnls, ExactCertificateIsFound) {
  const Matrix u = oracle::gaussian(8, 12, 5);
  Vector zeta = oracle::gaussian(12, 1, 6).cwiseAbs();
  zeta.head(4).setZero();
  const Vector xbar = oracle::gaussian(8, 1, 7);
  const Vector c = -(u * zeta + 0.3 * xbar);
  const NnlsResult r = nnls_mixed_solve(u, c, xbar);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(Nnls, RejectsBadInput) {
  EXPECT_THROW(nnls_mixed_solve(Matrix::Zero(3, 2), Vector::Zero(4),
                                Vector::Zero(3)),
               std::invalid_argument);
}

TEST(CriticalInstance, Structure) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto b = gen_critical_instance(100, 3, 1.2, s);
    EXPECT_NEAR(b.xbar.norm(), 1.0, 1e-14);
    // |x1| >= |x2| >= |x3| = |x4| = |x5| > 0 and zeros after.
    for (Index i = 0; i + 1 < 3; ++i)
      EXPECT_GE(std::abs(b.xbar(i)), std::abs(b.xbar(i + 1)));
    EXPECT_EQ(b.xbar(3), b.xbar(2));
    EXPECT_EQ(b.xbar(4), b.xbar(2));
    EXPECT_GT(std::abs(b.xbar(2)), 0.0);
    EXPECT_EQ(b.xbar.tail(95).norm(), 0.0);
    EXPECT_GE(b.zeta.minCoeff(), 0.0);
    EXPECT_GE(b.zeta_tilde.minCoeff(), 1.0);
    EXPECT_LE(b.zeta_tilde.maxCoeff(), 10.0);
    EXPECT_LE(b.nnls_residual, 1e-8);
  }
}

TEST(CriticalInstance, GlobalOptimumIsAttainedAtACoordinate) {
  const auto b = gen_critical_instance(50, 3, 1.2, 9);
  const CompositeProblem pr = build_sgep(b.instance());
  Index best = 0;
  (-b.zeta.cwiseQuotient(b.zeta_tilde)).minCoeff(&best);
  Matrix e = Matrix::Zero(50, 1);
  e(best, 0) = 1.0;
  EXPECT_NEAR(eval_F(pr, e), b.global_opt, 1e-12);
  EXPECT_GT(eval_F(pr, Matrix(b.xbar)), b.global_opt + 1e-3);
  // No feasible point goes below the bound.
  for (std::uint64_t s = 0; s < 200; ++s)
    EXPECT_GE(eval_F(pr, pr.manifold.random_point(s)), b.global_opt - 1e-12);
}

TEST(CriticalInstance, SeededAndValidated) {
  const auto a = gen_critical_instance(30, 3, 1.2, 4);
  const auto b = gen_critical_instance(30, 3, 1.2, 4);
  EXPECT_EQ(a.zeta, b.zeta);
  EXPECT_EQ(a.xbar, b.xbar);
  EXPECT_THROW(gen_critical_instance(5, 3, 1.2, 0), std::invalid_argument);
  EXPECT_THROW(gen_critical_instance(30, 3, 0.0, 0), std::invalid_argument);
}

TEST(CriticalInstance, PerturbedStartIsNearby) {
  const auto b = gen_critical_instance(100, 3, 1.2, 2);
  const Matrix x0 = perturbed_start(b, 2);
  EXPECT_NEAR(x0.norm(), 1.0, 1e-14);
  EXPECT_LE((x0 - Matrix(b.xbar)).norm(), 0.11);
  EXPECT_EQ(x0, perturbed_start(b, 2));
}

TEST(Sfda, ShapesAndLabels) {
  SfdaOptions opt;
  opt.features = 50;
  opt.blocks = 5;
  opt.train_per_class = 30;
  opt.test_per_class = 20;
  opt.signal_features = 10;
  const SfdaDataset d = gen_sfda(3, opt);
  EXPECT_EQ(d.train.rows(), 120);
  EXPECT_EQ(d.test.rows(), 80);
  EXPECT_EQ(d.train.cols(), 50);
  EXPECT_EQ(std::set<int>(d.train_labels.begin(), d.train_labels.end()).size(),
            4u);
  EXPECT_EQ(d.A.rows(), 50);
  SgepInstance inst{d.A, d.B, 0.1, std::nullopt, 3, 0.0};
  EXPECT_NO_THROW(inst.validate());
}

TEST(Sfda, CovarianceBlocks) {
  SfdaOptions opt;
  opt.features = 10;
  opt.blocks = 2;
  const Matrix s = sfda_covariance(opt);
  EXPECT_NEAR(s(0, 3), std::pow(0.8, 3), 1e-15);
  EXPECT_EQ(s(4, 5), 0.0);
  EXPECT_NEAR(s(6, 9), std::pow(0.8, 3), 1e-15);
}

TEST(Sfda, ScatterDecomposesTotalScatter) {
  const Matrix x = oracle::gaussian(40, 6, 1);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = i % 4;
  const Scatter sc = scatter_matrices(x, labels, 4);
  // Brute-force double loop over samples.
  Vector mu = Vector::Zero(6);
  for (Index s = 0; s < 40; ++s) mu += x.row(s).transpose();
  mu /= 40.0;
  Matrix total = Matrix::Zero(6, 6);
  for (Index s = 0; s < 40; ++s) {
    const Vector d = x.row(s).transpose() - mu;
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j) total(i, j) += d(i) * d(j);
  }
  total /= 40.0;
  const Matrix recon = sc.between + sc.within * (36.0 / 40.0);
  EXPECT_LE((recon - total).norm(), 1e-8 * total.norm());
}

TEST(Sfda, NearestCentroidOnSeparableData) {
  Matrix train(4, 2), test(4, 2);
  train << 0, 0, 10, 0, 0, 10, 10, 10;
  test << 0.5, 0.1, 9, 1, 1, 9, 9.5, 9.9;
  std::vector<int> labels = {0, 1, 2, 3};
  EXPECT_EQ(nearest_centroid_accuracy(train, labels, test, labels,
                                      Matrix::Identity(2, 2)),
            1.0);
  EXPECT_THROW(nearest_centroid_accuracy(train, labels, test, labels,
                                         Matrix::Zero(2, 1)),
               std::invalid_argument);
}

TEST(Sfda, SparsityThreshold) {
  Matrix x(2, 2);
  x << 1.0, 1e-6, 0.0, -0.5;
  EXPECT_DOUBLE_EQ(sparsity(x, 1e-5), 0.5);
  EXPECT_DOUBLE_EQ(sparsity(x, 1e-7), 0.25);
}
