#pragma once

#include <cstddef>
#include <functional>

namespace ethlab {

// Worker count: min(ETHLAB_THREADS, hardware_concurrency), at least 1.
unsigned worker_count();

// Runs fn(i) for i in [0, n). Work is split into static blocks; callers keep
// determinism by writing results into per-index slots and reducing serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ethlab
