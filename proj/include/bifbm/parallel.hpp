#pragma once

#include <cstddef>
#include <functional>

namespace bifbm {

// Worker count: BIFBM_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n) over contiguous chunks on up to worker_count()
// threads. Bodies must write only to index-owned state; the first exception
// thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace bifbm
