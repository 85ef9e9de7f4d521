#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace embedrule {

// Runs fn(task) for task in [0, n_tasks) on up to `threads` workers. Task
// assignment is static (round-robin) so callers that write per-task results
// and reduce them in task order stay deterministic. The first exception
// thrown by any task is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n_tasks, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n_tasks));
  if (threads <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < n_tasks; t += threads) fn(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::size_t hardware_threads() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace embedrule
