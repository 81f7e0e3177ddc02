#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace skewmix {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Items are handed
// out dynamically; callers must not depend on which thread runs an item. The
// first exception (lowest index among those thrown) is rethrown.
template <typename Fn>
void parallel_for(int workers, int count, Fn&& fn) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  int err_index = count;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  const int n_threads = std::min(workers, count);
  std::vector<std::jthread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads - 1));
  for (int t = 1; t < n_threads; ++t) threads.emplace_back(body);
  body();
  threads.clear();
  if (err) std::rethrow_exception(err);
}

}  // namespace skewmix
