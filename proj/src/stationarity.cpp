#include "mpgsa/stationarity.hpp"

#include "mpgsa/solvers.hpp"

#include <algorithm>

namespace mpgsa {

namespace {

InnerOptions probe_options(const StationarityOptions& options) {
  InnerOptions inner;
  inner.tol = options.inner_tol;
  inner.max_inner = 500;
  return inner;
}

void check_probe(const CompositeProblem& problem, const Matrix& x, double t) {
  require_shape(x, problem.manifold.n(), problem.manifold.p(), "probe point");
  if (!(t > 0.0)) throw std::invalid_argument("stationarity probe: t <= 0");
}

}  // namespace

double critical_residual(const CompositeProblem& problem, const Matrix& x,
                         double t, const StationarityOptions& options) {
  check_probe(problem, x, t);
  const Matrix y = problem.f->subgradient(x);
  const Matrix z = problem.h2->subgradient(x);
  TangentSubproblem sp{x, linearization_vector(problem, x, y, z), t,
                       problem.h1.get()};
  return solve_subproblem_robust(sp, probe_options(options)).v.norm() / t;
}

double lifted_b_residual(const CompositeProblem& problem, const Matrix& x,
                         double t, const StationarityOptions& options) {
  check_probe(problem, x, t);
  const FiniteMaxSmoothConvex* h2 = problem.finite_max_h2();
  if (h2 == nullptr) {
    throw std::invalid_argument("lifted_b_residual: h2 must be a finite max");
  }
  const Matrix y = problem.f->subgradient(x);
  const Matrix base_w = smooth_linearization(problem, x, y);
  const auto pieces = h2->active_pieces(x, options.eta, options.piece_cap);
  const auto sols = solve_piece_subproblems(problem, x, base_w, pieces, t,
                                            probe_options(options),
                                            options.use_threads);
  double worst = 0.0;
  for (const auto& s : sols) worst = std::max(worst, s.v.norm() / t);
  return worst;
}

StationarityReport check_stationarity(const CompositeProblem& problem,
                                      const Matrix& x, double t,
                                      const StationarityOptions& options) {
  StationarityReport report;
  report.t = t;
  report.critical_residual = critical_residual(problem, x, t, options);
  if (const auto* h2 = problem.finite_max_h2()) {
    report.active_pieces =
        h2->active_pieces(x, options.eta, options.piece_cap).size();
    report.lifted_b_residual = lifted_b_residual(problem, x, t, options);
  } else {
    report.active_pieces = 1;
  }
  return report;
}

}  // namespace mpgsa
