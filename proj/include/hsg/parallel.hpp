#pragma once

#include <cstddef>
#include <functional>

namespace hsg {

/// Worker count: HSG_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Each index is
/// handled exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. An exception thrown by fn is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hsg
