#include "mpgsa/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

namespace mpgsa::parallel {

namespace {
int g_override = 0;
}

int thread_count() {
  if (g_override > 0) return g_override;
  if (const char* env = std::getenv(kThreadsEnv)) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

void set_thread_count(int threads) { g_override = threads > 0 ? threads : 0; }

void for_each_index(std::size_t count,
                    const std::function<void(std::size_t)>& body,
                    bool use_threads) {
  if (count == 0) return;
  const int threads = use_threads ? thread_count() : 1;
  if (threads <= 1 || count == 1 || omp_in_parallel()) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mpgsa::parallel
