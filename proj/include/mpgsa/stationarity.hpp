#pragma once

// Residual oracles for criticality and lifted B-stationarity.
//
// Both residuals are ||v|| / t for the tangent subproblem at x: criticality
// uses the deterministic subgradient selection z in dh2(x), lifted
// B-stationarity takes the worst case over the gradients of every active
// piece of h2. A point passes a test when its residual vanishes.

#include "mpgsa/objective.hpp"
#include "mpgsa/subproblem.hpp"

#include <optional>

namespace mpgsa {

struct StationarityReport {
  double critical_residual = 0.0;
  /// Present only when h2 is a finite max.
  std::optional<double> lifted_b_residual;
  double t = 0.0;
  std::size_t active_pieces = 0;
};

struct StationarityOptions {
  double eta = 1e-8;
  std::size_t piece_cap = 64;
  /// Tolerance for the inner subproblem solves.
  double inner_tol = 1e-12;
  bool use_threads = true;
};

double critical_residual(const CompositeProblem& problem, const Matrix& x,
                         double t, const StationarityOptions& options = {});

/// Throws std::invalid_argument when h2 is not a finite max and
/// PieceCapExceeded when the active set is too large.
double lifted_b_residual(const CompositeProblem& problem, const Matrix& x,
                         double t, const StationarityOptions& options = {});

StationarityReport check_stationarity(const CompositeProblem& problem,
                                      const Matrix& x, double t,
                                      const StationarityOptions& options = {});

}  // namespace mpgsa
