#include "mpgsa/experiments.hpp"
#include "mpgsa/instances.hpp"
#include "mpgsa/solvers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mpgsa;

namespace {

SolverConfig sgep_config(const SgepInstance& inst) {
  SolverConfig cfg;
  cfg.t_rule = sgep_stepsize_rule(inst);
  return cfg;
}

}  // namespace

TEST(Config, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.gamma = 0.5;
  cfg.t_lo = 2.0;
  cfg.t_hi = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Stepsize, SgepRuleAndClamping) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 2.0;
  const Matrix b = Matrix::Identity(3, 3) * 4.0;
  Matrix x = Matrix::Zero(3, 1);
  x(0, 0) = 1.0;
  // tr(BX)^2 / (tr(AX) ||B||) = 16 / (2 * 4)
  EXPECT_NEAR(stepsize_sgep(x, a, b, 4.0), 2.0, 1e-15);
  x.setZero();
  x(1, 0) = 1.0;
  EXPECT_EQ(stepsize_sgep(x, a, b, 4.0, 1e-6, 1e6), 1e6);
  SolverConfig cfg;
  cfg.t_rule = [](const Matrix&) { return 1e9; };
  EXPECT_EQ(cfg.stepsize(x), cfg.t_hi);
  cfg.t_rule = [](const Matrix&) { return 1e-9; };
  EXPECT_EQ(cfg.stepsize(x), cfg.t_lo);
}

TEST(LineSearch, AcceptsSufficientDecrease) {
  SgepInstance inst = random_sgep(10, 2, 0.1, std::nullopt, 3);
  const CompositeProblem pr = build_sgep(inst);
  const Matrix x = pr.manifold.random_point(4);
  const double t = 0.5;
  TangentSubproblem sp{x,
                       linearization_vector(pr, x, pr.f->subgradient(x),
                                            pr.h2->subgradient(x)),
                       t, pr.h1.get()};
  const auto sol = solve_subproblem(sp);
  const double F = eval_F(pr, x);
  const auto ls = line_search(pr, x, sol.v, t, 0.5, F);
  EXPECT_LE(ls.F_next, F - ls.alpha / (2 * t) * sol.v.squaredNorm() + 1e-12);
  EXPECT_TRUE(pr.manifold.is_feasible(ls.x_next));
}

TEST(Mpgsa, RecoversLeadingGeneralizedEigenvalue) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    SgepInstance inst = random_sgep(12, 1, 0.0, std::nullopt, s);
    const CompositeProblem pr = build_sgep(inst);
    const auto res =
        mpgsa_solve(pr, pr.manifold.random_point(s + 50), sgep_config(inst));
    EXPECT_EQ(res.reason, Termination::Tolerance);
    EXPECT_NEAR(res.F, -oracle::max_generalized_eigenvalue(inst.A, inst.B),
                1e-6);
    EXPECT_TRUE(descent_holds(res, false));
  }
}

TEST(Mpgsa, MonotoneAndFeasible) {
  SgepInstance inst = random_sgep(25, 3, 0.05, std::nullopt, 9);
  const CompositeProblem pr = build_sgep(inst);
  const Matrix x0 = pr.manifold.random_point(1);
  const auto res = mpgsa_solve(pr, x0, sgep_config(inst));
  ASSERT_FALSE(res.log.empty());
  EXPECT_TRUE(descent_holds(res, false));
  EXPECT_LE(res.F, eval_F(pr, x0));
  EXPECT_TRUE(pr.manifold.is_feasible(res.x, 1e-8));
  for (std::size_t k = 1; k < res.log.size(); ++k)
    EXPECT_LE(res.log[k].F, res.log[k - 1].F + 1e-12);
  // The final step length is small compared to the first.
  EXPECT_LT(res.log.back().v_norm, res.log.front().v_norm);
}

TEST(Mpgsa, IterationCapReportsMaxIter) {
  SgepInstance inst = random_sgep(25, 3, 0.05, std::nullopt, 9);
  const CompositeProblem pr = build_sgep(inst);
  SolverConfig cfg = sgep_config(inst);
  cfg.max_iter = 1;
  const auto res = mpgsa_solve(pr, pr.manifold.random_point(1), cfg);
  EXPECT_EQ(res.reason, Termination::MaxIter);
  EXPECT_EQ(res.iterations, 1);
}

TEST(Mpgsa, RejectsInfeasibleStart) {
  SgepInstance inst = random_sgep(6, 2, 0.1, std::nullopt, 1);
  const CompositeProblem pr = build_sgep(inst);
  EXPECT_THROW(mpgsa_solve(pr, Matrix::Ones(6, 2), sgep_config(inst)),
               std::invalid_argument);
}

TEST(Empgsa, DescentOnPartialL1) {
  SgepInstance inst = random_sgep(20, 2, 0.1, Index{4}, 21);
  const CompositeProblem pr = build_sgep(inst);
  const Matrix x0 = pr.manifold.random_point(22);
  const auto res = empgsa_solve(pr, x0, sgep_config(inst));
  EXPECT_TRUE(descent_holds(res, true));
  EXPECT_LE(res.F, eval_F(pr, x0));
  for (const auto& rec : res.log) EXPECT_GE(rec.active_pieces, 1u);
}

TEST(Empgsa, RequiresFiniteMax) {
  struct Opaque : SubgradientConvex {
    double value(const Matrix&) const override { return 0.0; }
    Matrix subgradient(const Matrix& x) const override {
      return Matrix::Zero(x.rows(), x.cols());
    }
  };
  SgepInstance inst = random_sgep(6, 1, 0.1, std::nullopt, 2);
  CompositeProblem pr = build_sgep(inst);
  pr.h2 = std::make_shared<Opaque>();
  EXPECT_THROW(empgsa_solve(pr, pr.manifold.random_point(1), SolverConfig{}),
               std::invalid_argument);
}

TEST(Empgsa, EscapesConstructedCriticalPoint) {
  const auto bundle = gen_critical_instance(30, 3, 1.2, 4);
  SgepInstance inst = bundle.instance();
  const CompositeProblem pr = build_sgep(inst);
  SolverConfig cfg = default_exp2_config(30, 3, 1.2).solver;
  cfg.t_rule = sgep_stepsize_rule(inst);
  const auto res = empgsa_solve(pr, Matrix(bundle.xbar), cfg);
  EXPECT_LT(res.F, eval_F(pr, Matrix(bundle.xbar)) - 1e-3);
  EXPECT_TRUE(descent_holds(res, true));
}

TEST(Pieces, SerialAndThreadedAgree) {
  const auto bundle = gen_critical_instance(20, 3, 1.2, 8);
  SgepInstance inst = bundle.instance();
  const CompositeProblem pr = build_sgep(inst);
  const Matrix x = bundle.xbar;
  const auto pieces = pr.finite_max_h2()->active_pieces(x, 1e-8, 64);
  ASSERT_GT(pieces.size(), 1u);
  const Matrix base = smooth_linearization(pr, x, pr.f->subgradient(x));
  const double t = std::clamp(sgep_stepsize_rule(inst)(x), 1e-6, 1e6);
  const auto a = solve_piece_subproblems(pr, x, base, pieces, t, {}, false);
  const auto b = solve_piece_subproblems(pr, x, base, pieces, t, {}, true);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].v, b[i].v);
}
