#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cpce {

// Runs fn(i) for i in [0, n) across up to `threads` workers using a static
// block partition. Results must be written to disjoint, preallocated slots
// so the outcome is identical for any thread count. The first exception
// thrown by a worker is rethrown on the calling thread.
inline void ParallelFor(std::size_t n, int threads,
                        const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int k = threads > 0 ? threads : hw;
  k = std::min<int>(k, static_cast<int>(n));
  if (k <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
  const std::size_t chunk = (n + static_cast<std::size_t>(k) - 1) /
                            static_cast<std::size_t>(k);
  for (int t = 0; t < k; ++t) {
    const std::size_t lo = static_cast<std::size_t>(t) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, t, lo, hi]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cpce
