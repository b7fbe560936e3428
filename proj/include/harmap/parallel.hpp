#pragma once

// Static-partition parallel loop. Each index is processed exactly once and
// results are written by index, so output never depends on the thread count.

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace harmap {

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::size_t t = static_cast<std::size_t>(std::max(1, threads));
  t = std::min(t, n);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex m;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t k = 0; k < t; ++k) {
    pool.emplace_back([&, k] {
      for (std::size_t i = k; i < n; i += t) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          // Report the error a sequential run would have hit first.
          if (i < first_index) {
            first_index = i;
            first_error = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace harmap
