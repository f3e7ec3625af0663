#include "mpgsa/manifold.hpp"
#include "mpgsa/subproblem.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace mpgsa;

namespace {

TangentSubproblem make(Index n, Index p, double t, const ProxCapableConvex* h,
                       std::uint64_t seed) {
  TangentSubproblem sp;
  sp.x = Stiefel(n, p).random_point(seed);
  sp.w = 0.5 * oracle::gaussian(n, p, seed + 1000);
  sp.t = t;
  sp.h1 = h;
  return sp;
}

}  // namespace

TEST(Subproblem, ClosedFormIsProjectedGradientStep) {
  ZeroConvex zero;
  const TangentSubproblem sp = make(8, 2, 0.7, &zero, 1);
  const SubproblemSolution sol = solve_closed_form(sp);
  const Matrix expect = -0.7 * Stiefel(8, 2).project(sp.x, sp.w);
  EXPECT_LE((sol.v - expect).norm(), 1e-14);
  EXPECT_LE(sol.kkt_residual, 1e-12);
  // Same point from the independent tangent-coordinate solver.
  const Matrix ref = oracle::l1_subproblem_admm(sp.x, sp.w, sp.t, 0.0);
  EXPECT_LE((sol.v - ref).norm(), 1e-8);
}

TEST(Subproblem, ClosedFormRejectsNonzeroH1) {
  L1Norm h(0.2);
  EXPECT_THROW(solve_closed_form(make(5, 1, 1.0, &h, 2)), std::logic_error);
}

TEST(Subproblem, NewtonMatchesPrimalOracle) {
  L1Norm h(0.3);
  for (std::uint64_t s = 0; s < 8; ++s) {
    const TangentSubproblem sp = make(6, 2, 0.8, &h, 10 + s);
    const SubproblemSolution sol =
        solve_ssn_l1(sp, default_inner_tolerance(6, 2), 200);
    ASSERT_TRUE(sol.converged);
    const Matrix ref = oracle::l1_subproblem_admm(sp.x, sp.w, sp.t, 0.3);
    EXPECT_LE((sol.v - ref).norm(), 1e-6) << "seed " << s;
    EXPECT_LE(subproblem_objective(sp, sol.v),
              subproblem_objective(sp, ref) + 1e-9);
  }
}

TEST(Subproblem, FistaAndNewtonAgree) {
  L1Norm h(0.25);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const TangentSubproblem sp = make(20, 3, 0.5, &h, 50 + s);
    const double tol = default_inner_tolerance(20, 3);
    const auto a = solve_ssn_l1(sp, tol, 200);
    const auto b = solve_dual_fista(sp, tol, 200000);
    ASSERT_TRUE(a.converged);
    ASSERT_TRUE(b.converged);
    EXPECT_LE((a.v - b.v).norm(), 1e-6);
    EXPECT_LE(Stiefel(20, 3).tangency_error(sp.x, a.v), 1e-8);
  }
}

TEST(Subproblem, SolutionCertifiesDescent) {
  // v = 0 is feasible, so the optimum is no worse than h1(x) minus the
  // strong-convexity margin ||v||^2 / (2t).
  L1Norm h(0.2);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const TangentSubproblem sp = make(12, 2, 0.9, &h, 80 + s);
    const auto sol = solve_subproblem(sp);
    EXPECT_LE(subproblem_objective(sp, sol.v) +
                  sol.v.squaredNorm() / (2 * sp.t),
              h.value(sp.x) + 1e-9);
  }
}

TEST(Subproblem, DualGradientMatchesFiniteDifference) {
  L1Norm h(0.3);
  const TangentSubproblem sp = make(9, 3, 0.6, &h, 5);
  Matrix l = sym(oracle::gaussian(3, 3, 6)) * 0.1;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix d = sym(oracle::gaussian(3, 3, 20 + s));
    const double fd = oracle::central_difference(
        [&](const Matrix& m) { return dual_value(sp, m); }, l, d, 1e-7);
    const double an = (dual_gradient(sp, l).array() * d.array()).sum();
    EXPECT_NEAR(fd, an, 1e-5 * std::max(1.0, std::abs(an)));
  }
}

TEST(Subproblem, WarmStartFromSolutionConvergesImmediately) {
  L1Norm h(0.3);
  const TangentSubproblem sp = make(10, 2, 0.5, &h, 7);
  const double tol = default_inner_tolerance(10, 2);
  const auto cold = solve_ssn_l1(sp, tol, 200);
  const auto warm = solve_ssn_l1(sp, tol, 200, &cold.dual);
  EXPECT_LE(warm.inner_iterations, 1);
  EXPECT_LE((warm.v - cold.v).norm(), 1e-9);
}

TEST(Subproblem, InvalidInputsThrow) {
  L1Norm h(0.3);
  TangentSubproblem sp = make(5, 2, 1.0, &h, 1);
  sp.t = 0.0;
  EXPECT_THROW(solve_subproblem(sp), std::invalid_argument);
  sp.t = 1.0;
  sp.h1 = nullptr;
  EXPECT_THROW(solve_subproblem(sp), std::invalid_argument);
}
