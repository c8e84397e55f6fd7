#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace asr {

// Runs body(i) for i in [0, count) across up to num_threads workers.
// num_threads <= 0 means hardware concurrency. Tasks must write only to
// their own slots; aggregation happens after the join, so results are
// independent of scheduling.
inline void parallel_for(std::size_t count, int num_threads,
                         const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = num_threads > 0 ? static_cast<std::size_t>(num_threads)
                                        : (hw > 0 ? hw : 1);
  if (workers > count) workers = count;
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace asr
