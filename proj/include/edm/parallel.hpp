#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace edm {

/// Runs body(i) for i in [0, n) on up to `jobs` threads (the caller counts as
/// one). Each index is executed exactly once; callers write results into
/// pre-sized slots so the outcome never depends on the schedule. If bodies
/// throw, the exception from the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t n, std::size_t jobs, Body&& body) {
  if (n == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  pool.clear();  // joins

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace edm
