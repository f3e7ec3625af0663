#include "mpgsa/instances.hpp"
#include "mpgsa/stationarity.hpp"

#include <gtest/gtest.h>

using namespace mpgsa;

namespace {

struct Probe {
  CriticalInstanceBundle bundle;
  CompositeProblem problem;
  double t;
};

Probe probe(std::uint64_t seed, Index n = 40) {
  auto bundle = gen_critical_instance(n, 3, 1.2, seed);
  SgepInstance inst = bundle.instance();
  CompositeProblem pr = build_sgep(inst);
  const double t =
      std::clamp(sgep_stepsize_rule(inst)(Matrix(bundle.xbar)), 1e-6, 1e6);
  return {std::move(bundle), std::move(pr), t};
}

}  // namespace

TEST(Stationarity, ConstructedPointIsCriticalNotLiftedB) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Probe pb = probe(s);
    const auto rep = check_stationarity(pb.problem, pb.bundle.xbar, pb.t);
    EXPECT_LE(rep.critical_residual, 1e-7) << "seed " << s;
    ASSERT_TRUE(rep.lifted_b_residual.has_value());
    EXPECT_GE(*rep.lifted_b_residual, 1e-3) << "seed " << s;
    // Three tied entries compete for one top-K slot.
    EXPECT_EQ(rep.active_pieces, 3u);
  }
}

TEST(Stationarity, ZeroResidualIsIndependentOfProbeStep) {
  const Probe pb = probe(3);
  for (double scale : {0.5, 1.0, 2.0}) {
    EXPECT_LE(critical_residual(pb.problem, pb.bundle.xbar, scale * pb.t),
              1e-7);
    EXPECT_GE(lifted_b_residual(pb.problem, pb.bundle.xbar, scale * pb.t),
              1e-3);
  }
}

TEST(Stationarity, RandomPointFailsBoth) {
  const Probe pb = probe(1);
  const Matrix x = pb.problem.manifold.random_point(99);
  const auto rep = check_stationarity(pb.problem, x, pb.t);
  EXPECT_GT(rep.critical_residual, 1e-2);
  EXPECT_GT(*rep.lifted_b_residual, 1e-2);
  EXPECT_GE(*rep.lifted_b_residual, rep.critical_residual - 1e-12);
}

TEST(Stationarity, GlobalMinimizerPassesBoth) {
  const Probe pb = probe(2);
  const Vector ratio = -pb.bundle.zeta.cwiseQuotient(pb.bundle.zeta_tilde);
  Index i = 0;
  ratio.minCoeff(&i);
  Matrix e = Matrix::Zero(pb.bundle.xbar.size(), 1);
  e(i, 0) = 1.0;
  StationarityOptions opts;
  opts.piece_cap = 2000;
  const auto rep = check_stationarity(pb.problem, e, pb.t, opts);
  EXPECT_LE(rep.critical_residual, 1e-7);
  EXPECT_LE(*rep.lifted_b_residual, 1e-7);
}

TEST(Stationarity, Errors) {
  const Probe pb = probe(0);
  EXPECT_THROW(critical_residual(pb.problem, Matrix::Zero(3, 1), pb.t),
               std::invalid_argument);
  EXPECT_THROW(critical_residual(pb.problem, pb.bundle.xbar, 0.0),
               std::invalid_argument);
  Matrix e = Matrix::Zero(pb.bundle.xbar.size(), 1);
  e(0, 0) = 1.0;
  StationarityOptions tight;
  tight.piece_cap = 4;
  EXPECT_THROW(lifted_b_residual(pb.problem, e, pb.t, tight), PieceCapExceeded);
}
