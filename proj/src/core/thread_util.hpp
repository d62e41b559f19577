#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace entropart {

// Runs fn(0..num_tasks-1) on up to max_threads threads (0 = one per task)
// and joins before returning. Task results must not depend on scheduling;
// the join is the synchronization barrier.
inline void parallel_for(std::uint32_t num_tasks, std::uint32_t max_threads,
                         const std::function<void(std::uint32_t)>& fn) {
  if (num_tasks == 0) return;
  std::uint32_t threads = max_threads == 0 ? num_tasks
                                           : std::min(max_threads, num_tasks);
  if (threads <= 1) {
    for (std::uint32_t i = 0; i < num_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::uint32_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint32_t i = next.fetch_add(1);
        if (i >= num_tasks) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

} // namespace entropart
