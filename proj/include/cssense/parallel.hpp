#pragma once

#include <cstddef>
#include <functional>

namespace cssense {

/// Worker count: CS_TOOLKIT_THREADS when set to a positive integer, else the
/// machine's hardware concurrency (at least 1).
std::size_t thread_count();
/// Overrides the environment for this process; 0 restores the default.
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Work is split into contiguous blocks, so
/// callers that write results by index get the same output for any worker
/// count. The first exception thrown by a body is rethrown after all workers
/// finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cssense
