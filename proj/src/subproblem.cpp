#include "mpgsa/subproblem.hpp"

#include "mpgsa/manifold.hpp"

#include <cmath>
#include <limits>

namespace mpgsa {

namespace {

struct DualPoint {
  Matrix v;         // prox(x - t(w - A^* L)) - x
  Matrix residual;  // A_x(v), the dual gradient
  Matrix z;         // prox argument
};

DualPoint eval_dual(const TangentSubproblem& sp, const Matrix& lambda) {
  DualPoint d;
  d.z = sp.x - sp.t * (sp.w - 2.0 * sp.x * lambda);
  d.v = sp.h1->prox(d.z, sp.t) - sp.x;
  d.residual = normal_constraint_apply(sp.x, d.v);
  return d;
}

// (t/2)||w - A^* L||^2 - env_t h1(x - t(w - A^* L)); convex in L.
double dual_objective(const TangentSubproblem& sp, const Matrix& lambda) {
  Matrix q = sp.w - 2.0 * sp.x * lambda;
  return 0.5 * sp.t * q.squaredNorm() -
         moreau_envelope_value(*sp.h1, sp.x - sp.t * q, sp.t);
}

void validate(const TangentSubproblem& sp) {
  if (sp.h1 == nullptr) throw std::invalid_argument("subproblem: missing h1");
  if (!(sp.t > 0.0)) throw std::invalid_argument("subproblem: t must be > 0");
  require_shape(sp.w, sp.x.rows(), sp.x.cols(), "subproblem linearization");
}

SubproblemSolution finish(const TangentSubproblem& sp, Matrix lambda,
                          int iterations, double tol) {
  SubproblemSolution sol;
  DualPoint d = eval_dual(sp, lambda);
  sol.v = std::move(d.v);
  sol.dual = std::move(lambda);
  sol.kkt_residual = kkt_residual(sp, sol.v, sol.dual);
  sol.inner_iterations = iterations;
  sol.converged = sol.kkt_residual <= tol;
  return sol;
}

}  // namespace

double default_inner_tolerance(Index n, Index p) {
  return 1e-10 * std::sqrt(static_cast<double>(n * p));
}

double dual_value(const TangentSubproblem& sp, const Matrix& lambda) {
  validate(sp);
  return dual_objective(sp, lambda);
}

Matrix dual_gradient(const TangentSubproblem& sp, const Matrix& lambda) {
  validate(sp);
  return eval_dual(sp, lambda).residual;
}

double subproblem_objective(const TangentSubproblem& sp, const Matrix& v) {
  return sp.h1->value(sp.x + v) + (sp.w.array() * v.array()).sum() +
         v.squaredNorm() / (2.0 * sp.t);
}

double kkt_residual(const TangentSubproblem& sp, const Matrix& v,
                    const Matrix& dual) {
  validate(sp);
  require_shape(v, sp.x.rows(), sp.x.cols(), "kkt_residual direction");
  Matrix z = sp.x - sp.t * (sp.w - 2.0 * sp.x * sym(dual));
  Matrix stationarity = v - (sp.h1->prox(z, sp.t) - sp.x);
  return stationarity.norm() + normal_constraint_apply(sp.x, v).norm();
}

SubproblemSolution solve_closed_form(const TangentSubproblem& sp) {
  validate(sp);
  if (!sp.h1->is_zero()) {
    throw std::logic_error("solve_closed_form: requires h1 = 0");
  }
  SubproblemSolution sol;
  Matrix xtw = sym(sp.x.transpose() * sp.w);
  sol.v = -sp.t * (sp.w - sp.x * xtw);
  sol.dual = 0.5 * xtw;
  sol.kkt_residual = kkt_residual(sp, sol.v, sol.dual);
  sol.inner_iterations = 0;
  sol.converged = true;
  return sol;
}

SubproblemSolution solve_dual_fista(const TangentSubproblem& sp, double tol,
                                    int max_inner, const Matrix* warm_dual) {
  validate(sp);
  if (!(tol > 0.0)) throw std::invalid_argument("solve_dual_fista: tol <= 0");
  const Index p = sp.x.cols();
  // grad of the dual is L -> A_x(prox(...) - x): Lipschitz with t ||A||^2,
  // and ||A^* L|| = 2 ||L|| on the manifold.
  const double step = 1.0 / (4.0 * sp.t);

  Matrix lambda = warm_dual ? sym(*warm_dual) : Matrix::Zero(p, p);
  Matrix y = lambda;
  double momentum = 1.0;

  Matrix best = lambda;
  double best_res = std::numeric_limits<double>::infinity();

  int it = 0;
  for (; it < max_inner; ++it) {
    DualPoint at_lambda = eval_dual(sp, lambda);
    const double res = at_lambda.residual.norm();
    if (res < best_res) {
      best_res = res;
      best = lambda;
    }
    if (res <= tol) break;

    DualPoint at_y = eval_dual(sp, y);
    Matrix next = y - step * at_y.residual;
    const double next_momentum =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    // Gradient-based adaptive restart.
    if ((at_y.residual.array() * (next - lambda).array()).sum() > 0.0) {
      momentum = 1.0;
      y = lambda;
      continue;
    }
    y = next + ((momentum - 1.0) / next_momentum) * (next - lambda);
    lambda = std::move(next);
    momentum = next_momentum;
  }
  return finish(sp, std::move(best), it, tol);
}

SubproblemSolution solve_ssn_l1(const TangentSubproblem& sp, double tol,
                                int max_inner, const Matrix* warm_dual) {
  validate(sp);
  if (!sp.h1->l1_weight()) {
    throw std::logic_error("solve_ssn_l1: h1 must be a weighted l1 norm");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("solve_ssn_l1: tol <= 0");
  const double threshold = sp.t * *sp.h1->l1_weight();
  const Matrix& x = sp.x;
  const Index p = x.cols();
  constexpr double kRegularization = 1e-12;
  constexpr double kArmijo = 1e-4;

  Matrix lambda = warm_dual ? sym(*warm_dual) : Matrix::Zero(p, p);
  int it = 0;
  for (; it < max_inner; ++it) {
    DualPoint d = eval_dual(sp, lambda);
    const double res = d.residual.norm();
    if (res <= tol) return finish(sp, std::move(lambda), it, tol);

    // Generalized Jacobian H -> 2t A_x(D o (X H)) + eps H, D the prox mask.
    const Eigen::ArrayXXd mask =
        (d.z.array().abs() > threshold).cast<double>();
    auto jacobian = [&](const Matrix& h) -> Matrix {
      Matrix xh = x * h;
      Matrix masked = (mask * xh.array()).matrix();
      return 2.0 * sp.t * normal_constraint_apply(x, masked) +
             kRegularization * h;
    };

    // CG on the symmetric p x p space.
    Matrix dir = Matrix::Zero(p, p);
    Matrix r = -d.residual;
    Matrix s = r;
    double rr = r.squaredNorm();
    const double cg_tol = std::min(0.1, res) * res;
    const int cg_max = static_cast<int>(2 * p * (p + 1) + 10);
    for (int k = 0; k < cg_max && std::sqrt(rr) > cg_tol; ++k) {
      Matrix js = jacobian(s);
      const double curvature = (s.array() * js.array()).sum();
      if (!(curvature > 0.0)) break;
      const double a = rr / curvature;
      dir += a * s;
      r -= a * js;
      const double rr_next = r.squaredNorm();
      s = r + (rr_next / rr) * s;
      rr = rr_next;
    }

    const double slope = (d.residual.array() * dir.array()).sum();
    if (!(slope < 0.0) || !dir.allFinite()) {
      break;
    }
    const double psi = dual_objective(sp, lambda);
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Matrix trial = lambda + step * dir;
      if (dual_objective(sp, trial) <= psi + kArmijo * step * slope) {
        lambda = sym(trial);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // A tiny residual can sit below the resolution of the dual objective.
      Matrix trial = sym(lambda + dir);
      if (eval_dual(sp, trial).residual.norm() < res) {
        lambda = std::move(trial);
        continue;
      }
      break;
    }
  }

  SubproblemSolution fallback =
      solve_dual_fista(sp, tol, 200000, &lambda);
  fallback.inner_iterations += it;
  if (!fallback.converged) {
    throw NumericalError(
        "solve_ssn_l1: Newton iteration and FISTA fallback both failed "
        "(residual " + std::to_string(fallback.kkt_residual) + ")");
  }
  return fallback;
}

SubproblemSolution solve_subproblem(const TangentSubproblem& sp,
                                    const InnerOptions& options) {
  validate(sp);
  const double tol = options.tol > 0.0
                         ? options.tol
                         : default_inner_tolerance(sp.x.rows(), sp.x.cols());
  const Matrix* warm = options.warm_dual ? &*options.warm_dual : nullptr;
  SubproblemMethod method = options.method;
  if (method == SubproblemMethod::Auto) {
    if (sp.h1->is_zero()) method = SubproblemMethod::ClosedForm;
    else if (sp.h1->l1_weight()) method = SubproblemMethod::SemismoothNewton;
    else method = SubproblemMethod::DualFista;
  }
  switch (method) {
    case SubproblemMethod::ClosedForm:
      return solve_closed_form(sp);
    case SubproblemMethod::SemismoothNewton:
      return solve_ssn_l1(sp, tol, options.max_inner, warm);
    case SubproblemMethod::DualFista:
    case SubproblemMethod::Auto:
      break;
  }
  return solve_dual_fista(sp, tol, options.max_inner_fista, warm);
}

}  // namespace mpgsa
