// Minimal index-parallel loop over a fixed worker count.

#pragma once

#include <cstddef>
#include <functional>

namespace bjj {

// std::thread::hardware_concurrency(), at least 1.
int default_threads() noexcept;

// Calls fn(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any call is rethrown after all workers have stopped.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace bjj
