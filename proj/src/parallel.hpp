#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fairaudit::detail {

// Runs fn(i) for i in [0, n) over contiguous blocks on worker threads.
// Callers write results into per-index slots and reduce them in index
// order, so output never depends on the number of workers.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_block = 256) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, std::max<std::size_t>(1, n / min_block));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fairaudit::detail
