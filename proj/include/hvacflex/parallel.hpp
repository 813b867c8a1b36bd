#pragma once

// Fixed-width worker pool for index-parallel loops. Results are written by
// index, so the output order never depends on scheduling.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hvacflex {

class WorkerPool {
 public:
  explicit WorkerPool(int jobs = 1) : jobs_(std::max(1, jobs)) {}

  int jobs() const { return jobs_; }

  /// Calls fn(i) for i in [0, count). The first exception (lowest index) is
  /// rethrown after all workers stop.
  template <typename Fn>
  void for_each(int count, Fn&& fn) const {
    if (jobs_ == 1 || count <= 1) {
      for (int i = 0; i < count; ++i) fn(i);
      return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    int failed_at = count;
    std::exception_ptr error;
    auto work = [&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < failed_at) {
            failed_at = i;
            error = std::current_exception();
          }
        }
      }
    };
    std::vector<std::thread> threads;
    const int width = std::min(jobs_, count);
    threads.reserve(static_cast<std::size_t>(width));
    for (int k = 0; k < width; ++k) threads.emplace_back(work);
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
  }

 private:
  int jobs_;
};

}  // namespace hvacflex
