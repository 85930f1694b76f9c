// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qfl {

namespace detail {
inline std::atomic<unsigned>& worker_limit() {
  static std::atomic<unsigned> limit{0};  // 0 = hardware concurrency
  return limit;
}
inline thread_local bool inside_parallel_region = false;
}  // namespace detail

inline void set_max_workers(unsigned n) { detail::worker_limit().store(n); }

inline unsigned max_workers() {
  const unsigned configured = detail::worker_limit().load();
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, n). Tasks must be independent; callers that need a
// deterministic result write into per-index slots. Nested calls degrade to
// sequential execution instead of oversubscribing.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = max_workers();
  if (n <= 1 || workers <= 1 || detail::inside_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto body = [&]() {
    detail::inside_parallel_region = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) break;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        break;
      }
    }
    detail::inside_parallel_region = false;
  };
  std::vector<std::thread> threads;
  const std::size_t count = std::min<std::size_t>(workers, n);
  threads.reserve(count - 1);
  for (std::size_t t = 1; t < count; ++t) threads.emplace_back(body);
  body();
  for (auto& th : threads) th.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace qfl
