#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace actsub {

namespace detail {
inline std::atomic<int>& thread_cap_storage() {
  static std::atomic<int> cap{0};  // 0 = hardware concurrency
  return cap;
}
}  // namespace detail

/// Caps the number of worker threads used by parallel loops (0 restores
/// the hardware default). Results never depend on this value.
inline void set_thread_cap(int cap) { detail::thread_cap_storage().store(cap < 0 ? 0 : cap); }

inline int effective_thread_count() {
  const int cap = detail::thread_cap_storage().load();
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int base = hw > 0 ? hw : 1;
  return cap > 0 ? std::min(cap, base) : base;
}

/// Runs body(i) for i in [0, n). Work items must be independent; callers
/// write into preassigned slots so the outcome is order-insensitive.
/// The first exception thrown by any item is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const int threads = effective_thread_count();
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  pool.clear();  // joins
  if (error) std::rethrow_exception(error);
}

}  // namespace actsub
