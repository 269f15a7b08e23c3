#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace gylab {

/// Worker count from GYLAB_THREADS; 0, unset or unparsable means hardware
/// concurrency. Always at least 1.
unsigned thread_count();

/// Runs body(0..count-1) on up to thread_count() threads. Results must be
/// written to per-index slots by the caller, so output never depends on
/// scheduling. If any call throws, the exception from the lowest index is
/// rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// parallel_for collecting one value per index.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F&& fn) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace gylab
