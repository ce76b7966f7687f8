#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace gridlock {

/// Runs fn(i) for i in [0, count), optionally split over `workers` threads
/// in contiguous chunks. Work item i must depend only on i (derived RNG
/// streams, preallocated result slots), which makes results identical for
/// every worker count.
template <typename Fn>
void run_indexed(long long count, int workers, const Fn& fn) {
  if (count <= 0) return;
  if (workers < 1) workers = 1;
  if (static_cast<long long>(workers) > count) workers = static_cast<int>(count);
  if (workers == 1) {
    for (long long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, count, workers, w]() {
      const long long begin = count * w / workers;
      const long long end = count * (w + 1) / workers;
      for (long long i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace gridlock
