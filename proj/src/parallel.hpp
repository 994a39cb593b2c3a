#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace grouprl::detail {

inline int env_worker_cap() {
  if (const char* v = std::getenv("GROUP_RLVR_THREADS")) {
    const int n = std::atoi(v);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Index-chunked parallel loop. Work items must not share mutable state;
/// result ordering is the caller's job (index-addressed buffers).
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(env_worker_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace grouprl::detail
