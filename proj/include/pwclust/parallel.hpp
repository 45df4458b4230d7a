#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace pwclust {

/// Worker thread count. Defaults to the PWCLUST_THREADS environment variable,
/// else the hardware concurrency. Never affects results.
std::size_t thread_count();

/// Override the worker count; 0 restores the default.
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend on the thread count, so bodies must only write to per-index slots.
/// The exception from the lowest-indexed failing chunk is rethrown.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

template <class F>
void parallel_for(std::size_t n, F&& f) {
  parallel_chunks(n, [&f](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) f(i);
  });
}

}  // namespace pwclust
