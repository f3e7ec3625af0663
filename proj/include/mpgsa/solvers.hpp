#pragma once

// MPGSA and its enhanced variant EMPGSA: proximal-gradient-subgradient
// outer loops with an Armijo line search along the polar retraction.

#include "mpgsa/objective.hpp"
#include "mpgsa/subproblem.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mpgsa {

/// Unclamped stepsize t_k as a function of the current point.
using StepsizeRule = std::function<double(const Matrix&)>;

struct SolverConfig {
  double gamma = 0.5;
  /// Empty means a fixed stepsize t_fixed.
  StepsizeRule t_rule;
  double t_fixed = 1.0;
  double t_lo = 1e-6;
  double t_hi = 1e6;
  int max_iter = 10000;
  double vtol_scale = 1e-8;
  double eta = 1e-8;
  std::size_t piece_cap = 64;
  int max_backtracks = 50;
  std::uint64_t seed = 0;
  int reorthonormalize_every = 100;
  bool warm_start = true;
  /// Solve EMPGSA's per-piece subproblems on the OpenMP pool.
  bool parallel_pieces = true;
  InnerOptions inner;

  void validate() const;
  double stepsize(const Matrix& x) const;
};

struct IterateRecord {
  int k = 0;
  double F = 0.0;       // F(x^k)
  double F_next = 0.0;  // F(x^{k+1})
  double t = 0.0;
  double alpha = 0.0;
  double v_norm = 0.0;  // ||v^k|| (MPGSA) or ||v^{k,i_hat}|| (EMPGSA)
  /// EMPGSA: ||v^{k,i}|| for the exact-max piece; MPGSA: same as v_norm.
  double v_norm_max_piece = 0.0;
  /// Right-hand side of the accepted sufficient-decrease test (EMPGSA: the
  /// tightest over all active pieces).
  double decrease_bound = 0.0;
  int backtracks = 0;
  std::size_t active_pieces = 1;
  std::size_t selected_piece = 0;
  int inner_iterations = 0;
  bool inner_converged = true;
  double seconds = 0.0;
};

enum class Termination { Tolerance, MaxIter, LineSearchFailure };
std::string to_string(Termination reason);

struct SolveResult {
  Matrix x;
  double F = 0.0;
  int iterations = 0;
  Termination reason = Termination::MaxIter;
  /// ||v|| / t of the last subproblem solved.
  double stationarity = 0.0;
  std::vector<IterateRecord> log;
};

class LineSearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LineSearchResult {
  double alpha = 1.0;
  Matrix x_next;
  double F_next = 0.0;
  int backtracks = 0;
};

/// First alpha = gamma^m with F(Retr_x(alpha v)) <= F_x - alpha/(2t) ||v||^2.
/// Throws LineSearchFailure after max_backtracks reductions.
LineSearchResult line_search(const CompositeProblem& problem, const Matrix& x,
                             const Matrix& v, double t, double gamma,
                             double F_x, int max_backtracks = 50);

/// tr(X^T B X)^2 / (tr(X^T A X) ||B||_2), clamped to [t_lo, t_hi];
/// t_hi when tr(X^T A X) = 0.
double stepsize_sgep(const Matrix& x, const Matrix& a, const Matrix& b,
                     double specnorm_b, double t_lo = 1e-6, double t_hi = 1e6);

SolveResult mpgsa_solve(const CompositeProblem& problem, const Matrix& x0,
                        const SolverConfig& config);

/// Requires problem.finite_max_h2() != nullptr.
SolveResult empgsa_solve(const CompositeProblem& problem, const Matrix& x0,
                         const SolverConfig& config);

/// One subproblem per active piece of h2 at x, with z replaced by the piece
/// gradient. The serial and threaded paths produce identical results.
std::vector<SubproblemSolution> solve_piece_subproblems(
    const CompositeProblem& problem, const Matrix& x, const Matrix& base_w,
    const std::vector<ActivePiece>& pieces, double t,
    const InnerOptions& inner, bool use_threads);

/// Subproblem solve used by the outer loops: a Newton failure falls back to
/// dual FISTA and returns its (possibly non-converged) result.
SubproblemSolution solve_subproblem_robust(const TangentSubproblem& sp,
                                           const InnerOptions& inner);

}  // namespace mpgsa
