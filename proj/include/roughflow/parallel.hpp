#pragma once

#include <cstddef>
#include <functional>

namespace roughflow {

/// Worker cap for data-parallel loops. 0 restores the default, which is the
/// ROUGHFLOW_THREADS environment variable when set, else the hardware
/// concurrency.
void set_thread_count(unsigned n);
[[nodiscard]] unsigned thread_count();

/// Runs body(begin, end) over a partition of [0, n) into contiguous blocks.
/// Blocks are claimed dynamically; body must only write to slots it owns.
/// Exceptions thrown by body are rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Number of fixed-size chunks covering n items. Chunk boundaries depend only
/// on (n, chunk_size), so per-chunk seeds are independent of thread count.
[[nodiscard]] constexpr std::size_t chunk_count(std::size_t n,
                                                std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

}  // namespace roughflow
