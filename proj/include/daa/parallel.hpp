#pragma once

#include <cstddef>
#include <functional>

namespace daa {

/// Runs fn(i) for i in [0, count) on at most `workers` threads (0 = hardware
/// concurrency). Results must be written to per-index slots by the caller so
/// output order never depends on scheduling. The first exception thrown by
/// any task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

unsigned resolve_workers(unsigned requested) noexcept;

}  // namespace daa
