#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace localfactor {

// Thread count resolution: explicit value wins, then LOCALFACTOR_THREADS,
// then hardware concurrency. Results never depend on the choice; only wall
// time does.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LOCALFACTOR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, count), statically chunked across threads.
// Callers must write results keyed by i (per-trial slots or per-chunk
// integer tallies combined in index order) so output is identical for any
// thread count.
template <typename Fn>
void parallel_for(std::uint64_t count, unsigned threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count < 2) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  if (threads > count) threads = static_cast<unsigned>(count);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t lo = count * t / threads;
    const std::uint64_t hi = count * (t + 1) / threads;
    pool.emplace_back([lo, hi, &fn, &first_error, &err_mutex] {
      try {
        for (std::uint64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace localfactor
