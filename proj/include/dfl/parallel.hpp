#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace dfl {

/// Worker count: DFL_THREADS when set to a positive integer, else the
/// requested value, else the hardware concurrency. Always at least 1.
inline unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt) {
  if (const char* env = std::getenv("DFL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  if (requested && *requested > 0) return *requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1U;
}

/// Evaluates fn(k) for k in [0, n) on up to `threads` workers and returns the
/// results indexed by k, so callers can reduce in ascending order and get
/// the same answer for any thread count. The first exception is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      try {
        slots[k].emplace(fn(k));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(threads ? threads : 1, n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace dfl
