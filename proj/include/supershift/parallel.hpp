#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "supershift/numeric.hpp"

namespace supershift {

/// Thread count used when a caller passes 0.
inline unsigned default_thread_count() { return std::max(1U, std::thread::hardware_concurrency()); }

/// Runs body(i) for i in [0, n) on up to `threads` workers.
///
/// Each index is handled by exactly one worker, which inherits the caller's
/// working precision, so results written to slot i do not depend on the
/// thread count. The exception from the lowest failing index is rethrown.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const mpfr_prec_t bits = Real::working_precision();
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      ScopedPrecision guard(bits);
      for (std::size_t i = t; i < n; i += threads) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      mpfr_free_cache2(MPFR_FREE_LOCAL_CACHE);
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace supershift
