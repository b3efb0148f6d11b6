#pragma once

// Bounded worker pool for embarrassingly parallel trials. Workers never
// share mutable state; each task writes its own slot, so results are
// deterministic regardless of scheduling. COMBUSTION_LAB_THREADS bounds the
// pool (default: logical cores).

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace combust {

inline unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("COMBUSTION_LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

template <typename F>
void parallel_for(std::size_t count, F&& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), count ? count : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace combust
