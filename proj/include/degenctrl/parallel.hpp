#pragma once

#include <cstddef>
#include <functional>

namespace degenctrl {

/// Worker count: hardware concurrency, capped by DEGENCTRL_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Each index is handled exactly once; callers
/// write into pre-sized slots and reduce afterwards in index order, so the
/// result never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace degenctrl
