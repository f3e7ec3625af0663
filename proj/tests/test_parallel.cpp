#include "mpgsa/experiments.hpp"
#include "mpgsa/io.hpp"
#include "mpgsa/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>

using namespace mpgsa;

TEST(Parallel, VisitsEveryIndexOnce) {
  parallel::set_thread_count(4);
  std::vector<int> hits(1000, 0);
  parallel::for_each_index(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  parallel::set_thread_count(4);
  try {
    parallel::for_each_index(100, [](std::size_t i) {
      if (i == 17 || i == 63) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

TEST(Parallel, EnvironmentSetsThreadCount) {
  parallel::set_thread_count(0);
  ::setenv(parallel::kThreadsEnv, "3", 1);
  EXPECT_EQ(parallel::thread_count(), 3);
  ::unsetenv(parallel::kThreadsEnv);
  EXPECT_GE(parallel::thread_count(), 1);
}

TEST(Parallel, Exp2IsIndependentOfThreadCount) {
  const Exp2Config cfg = default_exp2_config(40, 3, 1.2);
  parallel::set_thread_count(1);
  const auto serial = run_exp2(cfg, 11, 4, false);
  parallel::set_thread_count(4);
  const auto threaded = run_exp2(cfg, 11, 4, true);
  ASSERT_EQ(serial.size(), threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].seed, threaded[i].seed);
    EXPECT_EQ(serial[i].mpgsa.F, threaded[i].mpgsa.F);
    EXPECT_EQ(serial[i].empgsa.F, threaded[i].empgsa.F);
    EXPECT_EQ(serial[i].empgsa.x, threaded[i].empgsa.x);
    EXPECT_EQ(serial[i].empgsa.iterations, threaded[i].empgsa.iterations);
  }
}

TEST(Parallel, ParallelPiecesMatchSerialPieces) {
  const auto bundle = gen_critical_instance(60, 3, 1.2, 5);
  SgepInstance inst = bundle.instance();
  const CompositeProblem pr = build_sgep(inst);
  SolverConfig cfg = default_exp2_config(60, 3, 1.2).solver;
  cfg.t_rule = sgep_stepsize_rule(inst);
  const Matrix x0 = perturbed_start(bundle, 5);
  parallel::set_thread_count(4);
  cfg.parallel_pieces = false;
  const auto a = empgsa_solve(pr, x0, cfg);
  cfg.parallel_pieces = true;
  const auto b = empgsa_solve(pr, x0, cfg);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t k = 0; k < a.log.size(); ++k) {
    EXPECT_EQ(a.log[k].F_next, b.log[k].F_next);
    EXPECT_EQ(a.log[k].selected_piece, b.log[k].selected_piece);
  }
}
