#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace operc {

// Effective worker count: explicit request wins, then the OPERC_WORKERS
// environment variable, then hardware concurrency.  Always >= 1.
int resolve_workers(int requested);

// Runs fn(trial) for trial in [0, trials) on `workers` threads.  Callers make
// fn write into a per-trial slot; reductions then happen sequentially, so the
// result does not depend on the worker count.
template <typename Fn>
void parallel_trials(std::int64_t trials, int workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (workers > trials) workers = static_cast<int>(trials > 0 ? trials : 1);
  if (workers <= 1) {
    for (std::int64_t t = 0; t < trials; ++t) fn(t);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  constexpr std::int64_t kChunk = 16;

  auto work = [&] {
    try {
      while (true) {
        std::int64_t lo = next.fetch_add(kChunk, std::memory_order_relaxed);
        if (lo >= trials) break;
        std::int64_t hi = std::min(lo + kChunk, trials);
        for (std::int64_t t = lo; t < hi; ++t) fn(t);
      }
    } catch (...) {
      std::lock_guard<std::mutex> g(err_mu);
      if (!err) err = std::current_exception();
      next.store(trials, std::memory_order_relaxed);  // drain remaining work
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace operc
