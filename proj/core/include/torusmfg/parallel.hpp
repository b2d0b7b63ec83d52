#pragma once

// Minimal fork-join worker pool for independent tasks (multi-start seeds, sweep
// points). Results are written by index, so output order never depends on timing.

#include <cstddef>
#include <functional>

namespace tmfg {

/// jobs <= 0 selects the hardware concurrency (at least 1).
int resolve_jobs(int jobs);

/// Runs task(0) ... task(count - 1) on up to `jobs` threads and waits for all of them.
/// The first exception thrown by any task is rethrown after every worker has stopped.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

}  // namespace tmfg
