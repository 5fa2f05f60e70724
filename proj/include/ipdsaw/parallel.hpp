#pragma once

// Replica runner: workers pull indices from a shared counter and write into a
// slot per replica, so results never depend on the number of threads.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ipdsaw/rng.hpp"

namespace ipdsaw::parallel {

/// Job count: the explicit request if positive, else IPDSAW_JOBS, else the
/// hardware concurrency.
inline unsigned resolve_jobs(int requested = 0) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("IPDSAW_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(index, rng) for index in [0, n) with rng = Rng::for_replica(seed, offset + index)
/// and returns the results in index order. The first exception (lowest index)
/// is rethrown after all workers stop.
template <class Fn>
auto run_replicas(std::size_t n, std::uint64_t seed, Fn&& fn, unsigned jobs = 0,
                  std::uint64_t offset = 0) {
  using Result = decltype(fn(std::size_t{0}, std::declval<Rng&>()));
  std::vector<Result> out(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::exception_ptr error;
  std::size_t error_index = n;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        Rng rng = Rng::for_replica(seed, offset + i);
        out[i] = fn(i, rng);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  const unsigned threads = std::min<std::size_t>(resolve_jobs(static_cast<int>(jobs)), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace ipdsaw::parallel
