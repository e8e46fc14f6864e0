#pragma once

#include <functional>

namespace hhomin {

/// Number of worker threads for element-parallel loops: the HHOMIN_THREADS
/// environment variable (0 or unset = hardware concurrency).
int thread_count();

/// Runs fn(i) for i in [0, n) split into contiguous chunks across
/// thread_count() threads. Writers must target disjoint per-index slots, so
/// results do not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace hhomin
