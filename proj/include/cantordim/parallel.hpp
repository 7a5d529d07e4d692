#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cantordim {

/// Worker cap: CANTORDIM_THREADS if set, else all hardware threads.
inline int max_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("CANTORDIM_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  }();
  return cached;
}

/// Static-partition parallel loop over [begin, end). Each index must write
/// only to its own output slot; the partition is deterministic, so results
/// are bit-identical to a sequential run.
template <typename F>
void parallel_for(long long begin, long long end, F&& body) {
  const long long n = end - begin;
  if (n <= 0) return;
  const int workers = static_cast<int>(std::min<long long>(max_threads(), n));
  if (workers <= 1) {
    for (long long i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const long long lo = begin + n * w / workers;
    const long long hi = begin + n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &body] {
      for (long long i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cantordim
