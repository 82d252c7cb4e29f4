#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace shc {

// Worker count: SHC_THREADS caps (or raises) the hardware default.
inline int max_workers() {
  if (const char* env = std::getenv("SHC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs body(0..n-1) over up to `workers` threads (0 = max_workers()).
// Each index runs exactly once; callers write results into per-index slots,
// so the outcome never depends on the worker count. The first exception
// thrown by a body is rethrown after all workers join.
template <class F>
void parallel_for(int n, F&& body, int workers = 0) {
  if (n <= 0) return;
  int w = workers > 0 ? workers : max_workers();
  w = std::min(w, n);
  if (w <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex err_mu;

  auto run = [&]() {
    for (;;) {
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) threads.emplace_back(run);
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace shc
