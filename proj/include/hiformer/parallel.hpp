#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hiformer {

/// Worker count from HIFORMER_THREADS (default 1, clamped to >= 1).
unsigned configured_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Indices are dealt
/// round-robin, so results written to per-index slots do not depend on the
/// worker count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace hiformer
