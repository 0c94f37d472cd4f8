#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

// Deterministic sample-level parallelism: work items write only to their own
// preallocated slot, so results are identical for any thread count; callers
// reduce the slots sequentially afterwards.

namespace emsa {

inline int default_threads() {
  if (const char* env = std::getenv("EMSA_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

template <typename Fn>
void parallel_for(std::uint64_t n, int n_threads, Fn&& fn) {
  if (n == 0) return;
  if (n_threads <= 1 || n == 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::uint64_t t = std::min<std::uint64_t>(static_cast<std::uint64_t>(n_threads), n);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> workers;
  for (std::uint64_t w = 0; w < t; ++w) {
    workers.emplace_back([&] {
      std::uint64_t i;
      while ((i = next.fetch_add(1)) < n) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : workers) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace emsa
