#pragma once

// The tangent-space proximal subproblem
//
//     min_{v : X^T v + v^T X = 0}  h1(x + v) + <w, v> + ||v||^2 / (2t)
//
// and three solvers for it. Multipliers live in the space of symmetric p x p
// matrices; the constraint operator is normal_constraint_apply and its
// adjoint is L -> 2 X L.

#include "mpgsa/core.hpp"
#include "mpgsa/objective.hpp"

#include <optional>

namespace mpgsa {

struct TangentSubproblem {
  Matrix x;
  Matrix w;
  double t = 1.0;
  const ProxCapableConvex* h1 = nullptr;
};

struct SubproblemSolution {
  Matrix v;
  Matrix dual;
  double kkt_residual = 0.0;
  int inner_iterations = 0;
  bool converged = false;
};

enum class SubproblemMethod { Auto, ClosedForm, DualFista, SemismoothNewton };

struct InnerOptions {
  SubproblemMethod method = SubproblemMethod::Auto;
  /// Non-positive selects the default 1e-10 * sqrt(np).
  double tol = -1.0;
  int max_inner = 200;
  int max_inner_fista = 200000;
  /// Multiplier to start from (warm start).
  std::optional<Matrix> warm_dual;
};

double default_inner_tolerance(Index n, Index p);

/// Dual function (t/2)||w - A^*(L)||^2 - env_t h1(x - t(w - A^*(L))) at a
/// symmetric p x p multiplier L, and its gradient A_x(v(L)).
double dual_value(const TangentSubproblem& sp, const Matrix& lambda);
Matrix dual_gradient(const TangentSubproblem& sp, const Matrix& lambda);

/// h1(x + v) + <w, v> + ||v||^2 / (2t).
double subproblem_objective(const TangentSubproblem& sp, const Matrix& v);

/// ||v - (prox_{t h1}(x - t(w - A^*(dual))) - x)||_F + ||A_x(v)||_F.
double kkt_residual(const TangentSubproblem& sp, const Matrix& v,
                    const Matrix& dual);

/// v = -t Proj_{T_x}(w). Only valid for h1 = 0.
SubproblemSolution solve_closed_form(const TangentSubproblem& sp);

/// Accelerated projected-free gradient method on the dual
///   (t/2)||A^* u - w||^2 - env_t h1(t A^* u - t w + x)
/// with adaptive restart; v recovered through the prox formula.
SubproblemSolution solve_dual_fista(const TangentSubproblem& sp, double tol,
                                    int max_inner,
                                    const Matrix* warm_dual = nullptr);

/// Damped semismooth Newton on A_x(prox(x - t(w - A^* L)) - x) = 0 for
/// h1 = lambda ||.||_1, with CG on the generalized Jacobian. Falls back to
/// solve_dual_fista on stagnation; throws NumericalError if that also fails.
SubproblemSolution solve_ssn_l1(const TangentSubproblem& sp, double tol,
                                int max_inner,
                                const Matrix* warm_dual = nullptr);

/// Dispatches on InnerOptions::method; Auto picks closed form for h1 = 0,
/// semismooth Newton for l1, dual FISTA otherwise.
SubproblemSolution solve_subproblem(const TangentSubproblem& sp,
                                    const InnerOptions& options = {});

}  // namespace mpgsa
