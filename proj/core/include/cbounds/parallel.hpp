#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cbounds {

/// Worker count: COUPLING_BOUNDS_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker threads. Work items are claimed
/// dynamically, so body must write only to slots owned by i. The exception
/// raised by the smallest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Results are stored by index, so any reduction over the returned vector is
/// independent of scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace cbounds
