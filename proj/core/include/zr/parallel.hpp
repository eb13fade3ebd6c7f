// core/include/zr/parallel.hpp
// SPDX-License-Identifier: Apache-2.0

#ifndef ZR_PARALLEL_HPP
#define ZR_PARALLEL_HPP

#include <cstddef>
#include <thread>
#include <vector>

namespace zr {

// Runs fn(i) for i in [0, count) on up to num_threads workers with a static
// block partition. Each index computes an independent result, so the outcome
// is bit-identical for any thread count; callers write into per-index slots.
template <typename Fn>
void parallel_for(std::size_t count, int num_threads, Fn&& fn) {
  if (count == 0) return;
  const std::size_t workers =
      num_threads <= 1
          ? 1
          : std::min<std::size_t>(static_cast<std::size_t>(num_threads), count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Resolves the effective thread count: flag value if > 0, else ZR_THREADS,
// else 1.
int resolve_threads(int flag_value);

}  // namespace zr

#endif  // ZR_PARALLEL_HPP
