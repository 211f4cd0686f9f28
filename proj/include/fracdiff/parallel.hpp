#pragma once

#include <cstddef>
#include <functional>

namespace fracdiff {

/// Worker count from FRACDIFF_THREADS if set, otherwise `requested`
/// (0 means hardware concurrency).
unsigned resolve_workers(unsigned requested);

/// Runs body(i) for i in [0, count) on up to `workers` threads with static
/// contiguous chunking. Each index is handled by exactly one call, so results
/// written per index are independent of the worker count. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace fracdiff
