#pragma once

// Seeded trial drivers for the two sparse generalized eigenvalue
// experiments. Trials are independent; run_exp1/run_exp2 spread them over
// the OpenMP pool and return them ordered by trial index, so the output does
// not depend on the thread count.

#include "mpgsa/instances.hpp"
#include "mpgsa/solvers.hpp"

#include <string>
#include <vector>

namespace mpgsa {

struct AlgoOutcome {
  std::string name;
  double F = 0.0;
  int iterations = 0;
  Termination reason = Termination::MaxIter;
  double stationarity = 0.0;
  double sparsity = 0.0;
  double accuracy = 0.0;  // nearest-centroid; exp1 only
  bool descent_ok = true;
  double seconds = 0.0;   // wall time, excluded from reports
  Matrix x;
  /// Set when the solver threw (e.g. the active-piece cap was exceeded);
  /// F, sparsity and accuracy are NaN and x is empty.
  std::string error;
  bool failed() const { return !error.empty(); }
};

/// Every logged step satisfies its sufficient-decrease inequality to `tol`:
/// MPGSA F_{k+1} <= F_k - a/(2t)||v||^2, EMPGSA the (d) test for the
/// exact-max piece plus the logged bound over all pieces.
bool descent_holds(const SolveResult& result, bool enhanced,
                   double tol = 1e-9);

struct Exp1Config {
  double lambda_l1 = 0.21;
  double lambda_partial = 0.22;
  Index K = 50;
  Index p = 3;
  SfdaOptions data;
  SolverConfig solver;
  double sparsity_threshold = 1e-5;
};

struct Exp1Trial {
  int trial = 0;
  std::uint64_t seed = 0;
  AlgoOutcome mpgsa_l1;
  AlgoOutcome mpgsa_partial;
  AlgoOutcome empgsa_partial;
  double generation_seconds = 0.0;
};

Exp1Trial run_exp1_trial(const Exp1Config& config, int trial,
                         std::uint64_t seed);
std::vector<Exp1Trial> run_exp1(const Exp1Config& config,
                                std::uint64_t base_seed, int trials,
                                bool use_threads = true);

struct Exp2Config {
  Index n = 100;
  Index K = 3;
  double lambda = 1.2;
  SolverConfig solver;
  double optimum_tol = 1e-6;
  double sparsity_threshold = 1e-5;
};

/// Default exp2 solver settings. The piece cap is raised to C(n-1, K-1) + 1
/// so that iterates with a single nonzero can still enumerate every piece.
Exp2Config default_exp2_config(Index n = 100, Index K = 3, double lambda = 1.2);

struct Exp2Trial {
  int trial = 0;
  std::uint64_t seed = 0;
  double global_opt = 0.0;
  double nnls_residual = 0.0;
  AlgoOutcome mpgsa;
  AlgoOutcome empgsa;
  bool mpgsa_optimal = false;
  bool empgsa_optimal = false;
  double generation_seconds = 0.0;
};

Exp2Trial run_exp2_trial(const Exp2Config& config, int trial,
                         std::uint64_t seed);
std::vector<Exp2Trial> run_exp2(const Exp2Config& config,
                                std::uint64_t base_seed, int trials,
                                bool use_threads = true);

}  // namespace mpgsa
