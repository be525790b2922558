#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace wclab {

// Partition [0, n) into contiguous chunks and run body(worker, lo, hi) on a
// small thread pool. Results must be merged associatively by the caller so
// the outcome does not depend on the worker count.
template <typename Body>
void parallel_chunks(std::int64_t n, int workers, const Body& body) {
  workers = std::max(1, workers);
  const int nw = static_cast<int>(std::min<std::int64_t>(workers, n));
  if (nw <= 1) {
    body(0, 0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(nw);
  std::vector<std::thread> pool;
  const std::int64_t chunk = (n + nw - 1) / nw;
  for (int w = 0; w < nw; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        body(w, lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace wclab
