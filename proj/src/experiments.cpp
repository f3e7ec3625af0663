#include "mpgsa/experiments.hpp"

#include "mpgsa/manifold.hpp"
#include "mpgsa/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace mpgsa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

AlgoOutcome run_algorithm(const std::string& name, bool enhanced,
                          const CompositeProblem& problem, const Matrix& x0,
                          const SolverConfig& config, double threshold) {
  const auto t0 = Clock::now();
  AlgoOutcome out;
  out.name = name;
  SolveResult res;
  try {
    res = enhanced ? empgsa_solve(problem, x0, config)
                   : mpgsa_solve(problem, x0, config);
  } catch (const PieceCapExceeded& e) {
    out.seconds = seconds_since(t0);
    out.error = e.what();
    out.F = out.sparsity = out.accuracy = out.stationarity =
        std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.seconds = seconds_since(t0);
  out.F = res.F;
  out.iterations = res.iterations;
  out.reason = res.reason;
  out.stationarity = res.stationarity;
  out.sparsity = sparsity(res.x, threshold);
  out.descent_ok = descent_holds(res, enhanced);
  out.x = std::move(res.x);
  return out;
}

std::uint64_t binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  double acc = 1.0;
  for (Index i = 1; i <= k; ++i) acc = acc * double(n - k + i) / double(i);
  return static_cast<std::uint64_t>(std::llround(acc));
}

}  // namespace

bool descent_holds(const SolveResult& result, bool enhanced, double tol) {
  for (const IterateRecord& rec : result.log) {
    if (rec.F_next > rec.decrease_bound + tol) return false;
    const double vv = rec.v_norm * rec.v_norm;
    const double bound =
        enhanced ? rec.F - rec.alpha / (4.0 * rec.t) *
                               (vv + rec.v_norm_max_piece * rec.v_norm_max_piece)
                 : rec.F - rec.alpha / (2.0 * rec.t) * vv;
    if (rec.F_next > bound + tol) return false;
  }
  return true;
}

Exp1Trial run_exp1_trial(const Exp1Config& config, int trial,
                         std::uint64_t seed) {
  Exp1Trial out;
  out.trial = trial;
  out.seed = seed;
  const auto t0 = Clock::now();
  const SfdaDataset data = gen_sfda(seed, config.data);

  SgepInstance l1;
  l1.A = data.A;
  l1.B = data.B;
  l1.lambda = config.lambda_l1;
  l1.p = config.p;
  l1.validate();
  SgepInstance partial = l1;
  partial.lambda = config.lambda_partial;
  partial.K = config.K;
  out.generation_seconds = seconds_since(t0);

  const Matrix x0 =
      Stiefel(data.A.rows(), config.p).random_point(mix_seed(seed, 1));
  SolverConfig cfg = config.solver;
  cfg.t_rule = sgep_stepsize_rule(l1);
  // Trials already occupy the pool.
  cfg.parallel_pieces = false;

  const CompositeProblem p_l1 = build_sgep(l1);
  const CompositeProblem p_partial = build_sgep(partial);
  out.mpgsa_l1 = run_algorithm("MPGSA-l1", false, p_l1, x0, cfg,
                               config.sparsity_threshold);
  out.mpgsa_partial = run_algorithm("MPGSA-partial", false, p_partial, x0, cfg,
                                    config.sparsity_threshold);
  out.empgsa_partial = run_algorithm("EMPGSA-partial", true, p_partial, x0,
                                     cfg, config.sparsity_threshold);
  for (AlgoOutcome* o :
       {&out.mpgsa_l1, &out.mpgsa_partial, &out.empgsa_partial}) {
    if (o->failed()) continue;
    o->accuracy = nearest_centroid_accuracy(data, o->x);
  }
  return out;
}

std::vector<Exp1Trial> run_exp1(const Exp1Config& config,
                                std::uint64_t base_seed, int trials,
                                bool use_threads) {
  std::vector<Exp1Trial> out(static_cast<std::size_t>(std::max(trials, 0)));
  parallel::for_each_index(
      out.size(),
      [&](std::size_t i) {
        out[i] = run_exp1_trial(config, static_cast<int>(i), base_seed + i);
      },
      use_threads);
  return out;
}

Exp2Config default_exp2_config(Index n, Index K, double lambda) {
  Exp2Config cfg;
  cfg.n = n;
  cfg.K = K;
  cfg.lambda = lambda;
  cfg.solver.piece_cap =
      std::max<std::size_t>(64, binomial(n - 1, K - 1) + 1);
  return cfg;
}

Exp2Trial run_exp2_trial(const Exp2Config& config, int trial,
                         std::uint64_t seed) {
  Exp2Trial out;
  out.trial = trial;
  out.seed = seed;
  const auto t0 = Clock::now();
  const CriticalInstanceBundle bundle =
      gen_critical_instance(config.n, config.K, config.lambda, seed);
  SgepInstance inst = bundle.instance();
  inst.validate();
  out.global_opt = bundle.global_opt;
  out.nnls_residual = bundle.nnls_residual;
  const Matrix x0 = perturbed_start(bundle, seed);
  out.generation_seconds = seconds_since(t0);

  SolverConfig cfg = config.solver;
  cfg.t_rule = sgep_stepsize_rule(inst);
  cfg.parallel_pieces = false;
  const CompositeProblem problem = build_sgep(inst);
  out.mpgsa = run_algorithm("MPGSA", false, problem, x0, cfg,
                            config.sparsity_threshold);
  out.empgsa = run_algorithm("EMPGSA", true, problem, x0, cfg,
                             config.sparsity_threshold);
  out.mpgsa_optimal =
      std::abs(out.mpgsa.F - out.global_opt) < config.optimum_tol;
  out.empgsa_optimal =
      std::abs(out.empgsa.F - out.global_opt) < config.optimum_tol;
  return out;
}

std::vector<Exp2Trial> run_exp2(const Exp2Config& config,
                                std::uint64_t base_seed, int trials,
                                bool use_threads) {
  std::vector<Exp2Trial> out(static_cast<std::size_t>(std::max(trials, 0)));
  parallel::for_each_index(
      out.size(),
      [&](std::size_t i) {
        out[i] = run_exp2_trial(config, static_cast<int>(i), base_seed + i);
      },
      use_threads);
  return out;
}

}  // namespace mpgsa
