#pragma once

#include <functional>

#include "spnet/geometry.hpp"

namespace spnet {

/// Worker count from SPNET_NUM_THREADS, else the hardware concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Work is
/// handed out in increasing index order; callers write results into
/// per-index slots so the outcome does not depend on the thread count. The
/// first exception thrown by any body is rethrown after all workers stop.
void parallel_for(Index count, const std::function<void(Index)>& body);

} // namespace spnet
