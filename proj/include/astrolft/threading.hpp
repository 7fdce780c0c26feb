#pragma once

#include <cstddef>
#include <functional>

namespace astrolft {

/// Worker count: min(hardware, ASTROLFT_THREADS if set).
int worker_count();

/// Runs fn(i) for i in [0, n) on the worker pool. Work items must be
/// independent; results should be written to pre-sized slots so that the
/// outcome does not depend on scheduling. Exceptions are rethrown on the
/// caller thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace astrolft
