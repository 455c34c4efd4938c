#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace fdl {

// Worker count: min(hardware, 8), capped by the FDL_THREADS environment
// variable. Results never depend on it; only wall time does.
int thread_count();

namespace detail {
void run_chunked(std::int64_t chunks,
                 const std::function<void(std::int64_t)>& task);
}

// Applies fn(i) for i in [0, n). Scheduling order is unspecified; fn must be
// independent across i.
template <class Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
  detail::run_chunked(n, [&](std::int64_t i) { fn(i); });
}

// Sum of fn(i) for i in [0, n), reduced in a fixed order: fixed-size chunks
// are summed sequentially and combined by a pairwise tree over the chunk
// index, so the result is bit-identical for any worker count.
template <class Fn>
double parallel_sum(std::int64_t n, Fn&& fn, std::int64_t chunk = 4096) {
  if (n <= 0) return 0.0;
  const std::int64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
  detail::run_chunked(nchunks, [&](std::int64_t c) {
    const std::int64_t lo = c * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += fn(i);
    partial[static_cast<std::size_t>(c)] = s;
  });
  // pairwise tree over chunk index
  for (std::int64_t width = 1; width < nchunks; width *= 2)
    for (std::int64_t i = 0; i + width < nchunks; i += 2 * width)
      partial[static_cast<std::size_t>(i)] +=
          partial[static_cast<std::size_t>(i + width)];
  return partial[0];
}

}  // namespace fdl
