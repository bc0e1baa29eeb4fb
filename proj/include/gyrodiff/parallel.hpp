#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gyrodiff {

// Process-wide worker budget (CLI --workers); 1 means serial.
int default_workers();
void set_default_workers(int n);
// True on threads started by parallel_for; nested loops there run serially.
bool& in_parallel_region();

// Runs body(k) for k in [0, n) on up to `workers` threads. Work is split in
// contiguous blocks, so results written by index are deterministic. The first
// exception thrown by any block is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body, int workers = default_workers()) {
  const std::size_t t = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (t <= 1 || in_parallel_region()) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t b = 0; b < t; ++b) {
    const std::size_t lo = n * b / t, hi = n * (b + 1) / t;
    pool.emplace_back([&, lo, hi] {
      in_parallel_region() = true;
      try {
        for (std::size_t k = lo; k < hi; ++k) body(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gyrodiff
