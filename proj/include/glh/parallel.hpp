#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace glh {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> threads{1};
  return threads;
}
} // namespace detail

/// Number of worker threads used by nodewise loops (default 1).
inline void set_thread_count(int n) { detail::thread_setting() = std::max(1, n); }
inline int thread_count() { return detail::thread_setting(); }

/// Runs body(i) for i in [0, count). Every index writes only its own output
/// slot, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::min<int>(thread_count(), static_cast<int>(std::max<std::size_t>(count, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(count, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

} // namespace glh
