#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kpzu {

/// Number of workers for `requested` (0 = hardware concurrency).
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, n) on up to `threads` workers. Work items are
/// independent, so results depend only on i. Every item runs; if any throw,
/// the exception of the smallest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const unsigned w = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t fail_index = n;
  std::exception_ptr fail;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < fail_index) {
          fail_index = i;
          fail = std::current_exception();
        }
      }
    }
  };
  if (w <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(worker);
  }
  if (fail) std::rethrow_exception(fail);
}

}  // namespace kpzu
