#include "mpgsa/solvers.hpp"

#include "mpgsa/manifold.hpp"
#include "mpgsa/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace mpgsa {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double tolerance_threshold(const SolverConfig& cfg, const Matrix& x) {
  return cfg.vtol_scale * static_cast<double>(x.rows() * x.cols());
}

void check_start(const CompositeProblem& problem, const Matrix& x0) {
  require_shape(x0, problem.manifold.n(), problem.manifold.p(), "initial point");
  if (!problem.manifold.is_feasible(x0, 1e-8)) {
    throw std::invalid_argument("initial point is not on the manifold");
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("SolverConfig: gamma must lie in (0,1)");
  if (!(eta > 0.0)) throw std::invalid_argument("SolverConfig: eta must be > 0");
  if (!(t_lo > 0.0) || t_hi < t_lo)
    throw std::invalid_argument("SolverConfig: need 0 < t_lo <= t_hi");
  if (max_iter < 0) throw std::invalid_argument("SolverConfig: max_iter < 0");
  if (piece_cap < 1) throw std::invalid_argument("SolverConfig: piece_cap < 1");
}

double SolverConfig::stepsize(const Matrix& x) const {
  const double raw = t_rule ? t_rule(x) : t_fixed;
  if (std::isnan(raw)) return t_hi;
  return std::clamp(raw, t_lo, t_hi);
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::Tolerance: return "tolerance";
    case Termination::MaxIter: return "max_iter";
    case Termination::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

LineSearchResult line_search(const CompositeProblem& problem, const Matrix& x,
                             const Matrix& v, double t, double gamma,
                             double F_x, int max_backtracks) {
  const double vv = v.squaredNorm();
  LineSearchResult res;
  double alpha = 1.0;
  for (int m = 0; m <= max_backtracks; ++m) {
    Matrix candidate = problem.manifold.retract(x, alpha * v);
    const double F_c = eval_F(problem, candidate);
    if (F_c <= F_x - alpha / (2.0 * t) * vv) {
      res.alpha = alpha;
      res.x_next = std::move(candidate);
      res.F_next = F_c;
      res.backtracks = m;
      return res;
    }
    alpha *= gamma;
  }
  throw LineSearchFailure("line search exceeded " +
                          std::to_string(max_backtracks) + " backtracks");
}

double stepsize_sgep(const Matrix& x, const Matrix& a, const Matrix& b,
                     double specnorm_b, double t_lo, double t_hi) {
  const double tr_a = (x.transpose() * (a * x)).trace();
  if (tr_a == 0.0) return t_hi;
  const double tr_b = (x.transpose() * (b * x)).trace();
  return std::clamp(tr_b * tr_b / (tr_a * specnorm_b), t_lo, t_hi);
}

SubproblemSolution solve_subproblem_robust(const TangentSubproblem& sp,
                                           const InnerOptions& inner) {
  try {
    return solve_subproblem(sp, inner);
  } catch (const NumericalError&) {
    const double tol = inner.tol > 0.0
                           ? inner.tol
                           : default_inner_tolerance(sp.x.rows(), sp.x.cols());
    return solve_dual_fista(sp, tol, inner.max_inner_fista);
  }
}

SolveResult mpgsa_solve(const CompositeProblem& problem, const Matrix& x0,
                        const SolverConfig& config) {
  config.validate();
  check_start(problem, x0);
  const auto start = Clock::now();

  SolveResult result;
  Matrix x = x0;
  double F_x = eval_F(problem, x);
  const double vtol = tolerance_threshold(config, x);
  InnerOptions inner = config.inner;

  for (int k = 0;; ++k) {
    if (k >= config.max_iter) {
      result.reason = Termination::MaxIter;
      break;
    }
    if (config.reorthonormalize_every > 0 && k > 0 &&
        k % config.reorthonormalize_every == 0) {
      x = polar_factor(x);
      F_x = eval_F(problem, x);
    }
    const double t = config.stepsize(x);

    // Subgradient selection, then the tangent subproblem.
    const Matrix y = problem.f->subgradient(x);
    const Matrix z = problem.h2->subgradient(x);
    TangentSubproblem sp{x, linearization_vector(problem, x, y, z), t,
                         problem.h1.get()};
    SubproblemSolution sol = solve_subproblem_robust(sp, inner);
    if (config.warm_start) inner.warm_dual = sol.dual;

    const double vv = sol.v.squaredNorm();
    result.stationarity = std::sqrt(vv) / t;
    if (vv / (t * t) < vtol) {
      result.reason = Termination::Tolerance;
      break;
    }

    // Armijo backtracking along the retraction.
    LineSearchResult ls;
    try {
      ls = line_search(problem, x, sol.v, t, config.gamma, F_x,
                       config.max_backtracks);
    } catch (const LineSearchFailure&) {
      result.reason = Termination::LineSearchFailure;
      break;
    }

    IterateRecord rec;
    rec.k = k;
    rec.F = F_x;
    rec.F_next = ls.F_next;
    rec.t = t;
    rec.alpha = ls.alpha;
    rec.v_norm = std::sqrt(vv);
    rec.v_norm_max_piece = rec.v_norm;
    rec.decrease_bound = F_x - ls.alpha / (2.0 * t) * vv;
    rec.backtracks = ls.backtracks;
    rec.inner_iterations = sol.inner_iterations;
    rec.inner_converged = sol.converged;
    rec.seconds = elapsed(start);
    result.log.push_back(rec);

    x = std::move(ls.x_next);
    F_x = ls.F_next;
  }

  result.x = std::move(x);
  result.F = F_x;
  result.iterations = static_cast<int>(result.log.size());
  return result;
}

std::vector<SubproblemSolution> solve_piece_subproblems(
    const CompositeProblem& problem, const Matrix& x, const Matrix& base_w,
    const std::vector<ActivePiece>& pieces, double t,
    const InnerOptions& inner, bool use_threads) {
  std::vector<SubproblemSolution> out(pieces.size());
  parallel::for_each_index(
      pieces.size(),
      [&](std::size_t i) {
        TangentSubproblem sp{x, base_w - pieces[i].gradient, t,
                             problem.h1.get()};
        out[i] = solve_subproblem_robust(sp, inner);
      },
      use_threads);
  return out;
}

SolveResult empgsa_solve(const CompositeProblem& problem, const Matrix& x0,
                         const SolverConfig& config) {
  config.validate();
  check_start(problem, x0);
  const FiniteMaxSmoothConvex* h2 = problem.finite_max_h2();
  if (h2 == nullptr) {
    throw std::invalid_argument("empgsa_solve: h2 must be a finite max");
  }
  const auto start = Clock::now();

  SolveResult result;
  Matrix x = x0;
  ObjectiveParts parts = eval_parts(problem, x);
  double F_x = parts.total();
  const double vtol = tolerance_threshold(config, x);
  InnerOptions inner = config.inner;

  for (int k = 0;; ++k) {
    if (k >= config.max_iter) {
      result.reason = Termination::MaxIter;
      break;
    }
    if (config.reorthonormalize_every > 0 && k > 0 &&
        k % config.reorthonormalize_every == 0) {
      x = polar_factor(x);
      parts = eval_parts(problem, x);
      F_x = parts.total();
    }
    const double t = config.stepsize(x);

    // One subproblem per eta-active piece.
    const Matrix y = problem.f->subgradient(x);
    const Matrix base_w = smooth_linearization(problem, x, y);
    const std::vector<ActivePiece> pieces =
        h2->active_pieces(x, config.eta, config.piece_cap);
    const std::vector<SubproblemSolution> sols = solve_piece_subproblems(
        problem, x, base_w, pieces, t, inner, config.parallel_pieces);
    const std::size_t count = pieces.size();
    std::vector<double> vv(count);
    int inner_iterations = 0;
    bool inner_converged = true;
    for (std::size_t i = 0; i < count; ++i) {
      vv[i] = sols[i].v.squaredNorm();
      inner_iterations += sols[i].inner_iterations;
      inner_converged = inner_converged && sols[i].converged;
    }

    // Backtracking over all candidates simultaneously.
    std::vector<Matrix> candidates(count);
    std::vector<double> F_c(count);
    double alpha = 1.0;
    bool accepted = false;
    bool converged = false;
    std::size_t best = 0;
    double bound = 0.0;
    int m = 0;
    for (; m <= config.max_backtracks; ++m) {
      parallel::for_each_index(
          count,
          [&](std::size_t i) {
            candidates[i] = problem.manifold.retract(x, alpha * sols[i].v);
            F_c[i] = eval_F(problem, candidates[i]);
          },
          config.parallel_pieces);
      // (c): i_hat minimises F(x^{k,i}) + alpha/(4t) ||v^{k,i}||^2; ties to
      // the lowest piece index.
      best = 0;
      double best_val = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < count; ++i) {
        const double val = F_c[i] + alpha / (4.0 * t) * vv[i];
        if (val < best_val) {
          best_val = val;
          best = i;
        }
      }
      result.stationarity = std::sqrt(vv[best]) / t;
      if (m == 0 && vv[best] / (t * t) < vtol) {
        converged = true;
        break;
      }
      // (d): test against every active piece.
      bound = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < count; ++i) {
        const double rhs = F_x + parts.h2 - pieces[i].value -
                           alpha / (4.0 * t) * vv[best] -
                           alpha / (4.0 * t) * vv[i];
        bound = std::min(bound, rhs);
      }
      if (F_c[best] <= bound) {
        accepted = true;
        break;
      }
      alpha *= config.gamma;
    }
    if (converged) {
      result.reason = Termination::Tolerance;
      break;
    }
    if (!accepted) {
      result.reason = Termination::LineSearchFailure;
      break;
    }
    if (config.warm_start) inner.warm_dual = sols[best].dual;

    IterateRecord rec;
    rec.k = k;
    rec.F = F_x;
    rec.F_next = F_c[best];
    rec.t = t;
    rec.alpha = alpha;
    rec.v_norm = std::sqrt(vv[best]);
    rec.v_norm_max_piece = std::sqrt(vv[0]);
    rec.decrease_bound = bound;
    rec.backtracks = m;
    rec.active_pieces = count;
    rec.selected_piece = best;
    rec.inner_iterations = inner_iterations;
    rec.inner_converged = inner_converged;
    rec.seconds = elapsed(start);
    result.log.push_back(rec);

    x = std::move(candidates[best]);
    parts = eval_parts(problem, x);
    F_x = parts.total();
  }

  result.x = std::move(x);
  result.F = F_x;
  result.iterations = static_cast<int>(result.log.size());
  return result;
}

}  // namespace mpgsa
