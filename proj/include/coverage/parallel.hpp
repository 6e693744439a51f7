#pragma once

#include <cstddef>
#include <functional>

namespace coverage {

/// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
/// Each index is processed exactly once; results must be written to
/// per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

/// Overrides the default worker count used when `threads` is 0.
void set_default_threads(unsigned threads);

}  // namespace coverage
