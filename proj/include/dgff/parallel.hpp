// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dgff {

/// Static block partition of [0, count) over `width` threads.
///
/// Outputs must be written to per-index slots; any reduction over them is
/// the caller's job and must run in index order so that results do not
/// depend on `width`.
template <class F>
void parallel_for(std::int64_t count, int width, F&& body) {
  if (count <= 0) return;
  if (width <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  width = static_cast<int>(std::min<std::int64_t>(width, count));
  std::vector<std::thread> pool;
  pool.reserve(width);
  std::exception_ptr err;
  std::mutex err_mu;
  for (int t = 0; t < width; ++t) {
    const std::int64_t lo = count * t / width;
    const std::int64_t hi = count * (t + 1) / width;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace dgff
