#pragma once

// Replica ensembles.  Replica r always uses StreamKey{seed, r}; results are
// stored by replica index, so output is independent of thread count and
// scheduling.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "fluctlab/error.hpp"
#include "fluctlab/lpp.hpp"
#include "fluctlab/rng.hpp"

namespace fluctlab {

/// $FLUCTLAB_THREADS if set and positive, else hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* s = std::getenv("FLUCTLAB_THREADS"); s && *s) {
    try {
      const long v = std::stol(s);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(r) for r in [first, first + count) on `threads` workers.
/// The first exception thrown by fn is rethrown after all workers stop.
template <class Fn>
auto run_replicas(std::uint64_t first, std::uint64_t count, Fn&& fn, unsigned threads = default_thread_count())
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t>> {
  using R = std::invoke_result_t<Fn&, std::uint64_t>;
  std::vector<std::optional<R>> slots(count);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= count || failed.load()) return;
      try {
        slots[k].emplace(fn(first + k));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  threads = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(count, 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

template <class Fn>
auto run_replicas(std::uint64_t count, Fn&& fn, unsigned threads = default_thread_count()) {
  return run_replicas(0, count, std::forward<Fn>(fn), threads);
}

inline std::vector<LppOutcome> run_ensemble(const GridShape& shape, const WeightSpec& spec, std::uint64_t base_seed,
                                            std::uint64_t replicas, unsigned threads = default_thread_count()) {
  detail::require(replicas >= 1, "run_ensemble: replicas must be positive");
  shape.validate();
  return run_replicas(
      replicas, [&](std::uint64_t r) { return sample_last_passage(shape, spec, {base_seed, r}); }, threads);
}

} // namespace fluctlab
