#pragma once

#include <cstddef>
#include <functional>

namespace mpgsa::parallel {

/// Environment variable consulted for the worker count.
inline constexpr const char* kThreadsEnv = "MPGSA_NUM_THREADS";

/// Worker count: MPGSA_NUM_THREADS if set and positive, otherwise the
/// OpenMP default.
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count). Each index writes only its own output
/// slot, so results are identical for any thread count. Exceptions thrown by
/// a body are captured and the one with the lowest index is rethrown.
void for_each_index(std::size_t count,
                    const std::function<void(std::size_t)>& body,
                    bool use_threads = true);

}  // namespace mpgsa::parallel
