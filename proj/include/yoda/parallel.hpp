#pragma once

#include <cstddef>
#include <functional>

namespace yoda {

// Worker cap: YODA_THREADS env var when set (minimum 1), otherwise hardware
// concurrency. Results must be written to per-index slots by the callback;
// any reduction happens after the join, in index order, so the worker count
// never changes numeric results.
size_t thread_budget();
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

} // namespace yoda
