#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace gilbert {

namespace detail {
inline std::atomic<int>& thread_limit_storage() {
  static std::atomic<int> limit{0};  // 0 = hardware concurrency
  return limit;
}
}  // namespace detail

/// Caps the number of worker threads used by the exact oracles.
inline void set_thread_limit(int threads) { detail::thread_limit_storage() = std::max(0, threads); }

inline int thread_limit() {
  const int configured = detail::thread_limit_storage();
  if (configured > 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(chunk) for chunk in [0, chunks) and returns the results in
/// chunk order. The chunking is fixed by the caller, so the results (and any
/// reduction done over them in order) do not depend on the thread count.
template <class Fn>
auto map_chunks(std::size_t chunks, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(chunks);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(thread_limit()), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) out[c] = fn(c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) out[c] = fn(c);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace gilbert
