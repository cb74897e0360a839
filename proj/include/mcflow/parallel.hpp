#pragma once

#include <cstddef>
#include <functional>

namespace mcflow {

/// Worker count for per-vertex diagnostics: MCFLOW_THREADS if set (>= 1),
/// otherwise the hardware concurrency.
unsigned diagnostic_threads();

/// Runs body(i) for i in [0, count) over contiguous chunks. Each index is
/// visited exactly once; the body must only write to slot i of its outputs.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mcflow
