#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace patchbound {

/// Worker count for `requested` (0 = hardware concurrency, at least 1).
inline int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

/// Runs fn(i) for i in [0, count) on `jobs` threads. Results keep index
/// order; an exception from fn(i) is stored in errors[i] and the rest run on.
template <class Result, class Fn>
std::vector<Result> parallel_map(int count, int jobs, Fn fn, std::vector<std::exception_ptr>& errors) {
  std::vector<Result> results(static_cast<std::size_t>(count));
  errors.assign(static_cast<std::size_t>(count), nullptr);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min(resolve_jobs(jobs), std::max(count, 1));
  if (threads == 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace patchbound
