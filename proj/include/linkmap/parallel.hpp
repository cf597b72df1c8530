#pragma once

#include <cstddef>
#include <functional>

namespace linkmap {

/// LINKMAP_THREADS when set to a positive integer, else hardware concurrency.
unsigned default_worker_count();

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are
/// handed out by index; callers write to per-index slots so results do not
/// depend on the schedule. The first exception thrown is rethrown.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace linkmap
