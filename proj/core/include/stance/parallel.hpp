#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace stance {

// Runs fn over [0, n) split into contiguous blocks, one per worker. Callers
// must only write to disjoint, preallocated slots so results do not depend
// on scheduling.
inline void parallel_for_blocks(std::size_t n, unsigned threads,
                                const std::function<void(std::size_t, std::size_t)>& fn) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  if (threads > n) threads = static_cast<unsigned>(n);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    if (begin >= n) break;
    const std::size_t end = std::min(n, begin + chunk);
    workers.emplace_back(fn, begin, end);
  }
  for (auto& w : workers) w.join();
}

}  // namespace stance
