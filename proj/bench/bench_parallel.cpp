// Serial reference path against the OpenMP path for the two parallel
// kernels: independent experiment trials and per-piece subproblem solves.

#include "mpgsa/experiments.hpp"
#include "mpgsa/instances.hpp"
#include "mpgsa/parallel.hpp"

#include <benchmark/benchmark.h>

using namespace mpgsa;

namespace {

void BM_Exp2Trials(benchmark::State& state) {
  const bool threaded = state.range(0) != 0;
  const Exp2Config cfg = default_exp2_config(60, 3, 1.2);
  parallel::set_thread_count(threaded ? 0 : 1);
  for (auto _ : state) {
    auto rows = run_exp2(cfg, 0, 8, threaded);
    benchmark::DoNotOptimize(rows);
  }
  state.SetLabel(threaded ? "openmp" : "serial");
}
BENCHMARK(BM_Exp2Trials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EmpgsaPieces(benchmark::State& state) {
  const bool threaded = state.range(0) != 0;
  const auto bundle = gen_critical_instance(100, 3, 1.2, 1);
  const SgepInstance inst = bundle.instance();
  const CompositeProblem pr = build_sgep(inst);
  SolverConfig cfg = default_exp2_config(100, 3, 1.2).solver;
  cfg.t_rule = sgep_stepsize_rule(inst);
  cfg.parallel_pieces = threaded;
  parallel::set_thread_count(threaded ? 0 : 1);
  const Matrix x0 = perturbed_start(bundle, 1);
  for (auto _ : state) {
    auto res = empgsa_solve(pr, x0, cfg);
    benchmark::DoNotOptimize(res);
  }
  state.SetLabel(threaded ? "openmp" : "serial");
}
BENCHMARK(BM_EmpgsaPieces)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
