#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aw4re {

// Worker count: AW4RE_THREADS when set and positive, else the hardware
// concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("AW4RE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool in_worker = false;
}  // namespace detail

// Runs fn(i) for i in [begin, end) over contiguous chunks. Results must not
// depend on scheduling; the first exception is rethrown on the caller.
// Nested calls from a worker run serially.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = detail::in_worker ? 1 : std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(n) * w / workers);
    const int hi =
        begin + static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    threads.emplace_back([&, lo, hi] {
      detail::in_worker = true;
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace aw4re
