#pragma once

#include <cstddef>
#include <functional>

namespace genmean {

/// Worker count: GENMEAN_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(0) .. body(n - 1) across worker threads. Each index is visited
/// exactly once; callers write results into per-index slots so the outcome
/// does not depend on scheduling. If any call throws, the exception from the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace genmean
