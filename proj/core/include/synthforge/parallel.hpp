#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace synthforge {

/// Runs index-addressed tasks on a fixed number of threads. Each task writes
/// only to its own output slot, so results never depend on the schedule.
class WorkerPool {
 public:
  /// workers == 0 picks std::thread::hardware_concurrency().
  explicit WorkerPool(std::size_t workers = 1)
      : workers_(workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers) {}

  std::size_t workers() const { return workers_; }

  /// Calls task(i) for every i in [0, count). The first exception thrown by
  /// any task (lowest index wins) is rethrown after all threads join.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) const {
    if (count == 0) return;
    const std::size_t threads = std::min(workers_, count);
    if (threads == 1) {
      for (std::size_t i = 0; i < count; ++i) task(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = count;
    auto worker = [&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (i < error_index) {
            error_index = i;
            error = std::current_exception();
          }
        }
      }
    };
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    if (error) std::rethrow_exception(error);
  }

  /// Maps [0, count) through fn into a vector ordered by index.
  template <typename Fn>
  auto map(std::size_t count, Fn&& fn) const {
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> out(count);
    parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
    return out;
  }

 private:
  std::size_t workers_;
};

}  // namespace synthforge
