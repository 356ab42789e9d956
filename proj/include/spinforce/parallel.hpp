#ifndef SPINFORCE_PARALLEL_HPP
#define SPINFORCE_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spinforce {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written by index so output order never depends on scheduling. The first
/// exception thrown by any task is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure)
            failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace spinforce

#endif // SPINFORCE_PARALLEL_HPP
