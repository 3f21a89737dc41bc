#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace ocflow::detail {

inline int worker_count() {
  if (const char* env = std::getenv("OCFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Run fn(begin, end) over a static partition of [0, n). Each index is
/// processed by exactly one worker, so writes to disjoint per-index outputs
/// stay bit-deterministic regardless of the worker count.
inline void parallel_chunks(int n, const std::function<void(int, int)>& fn) {
  const int workers = std::min(worker_count(), std::max(1, n));
  if (workers == 1 || n < 2) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace ocflow::detail
