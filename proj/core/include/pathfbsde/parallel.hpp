#pragma once

#include <cstddef>
#include <functional>

namespace pathfbsde {

/// Worker threads used by parallelFor; 0 restores the hardware default.
void setThreadCount(std::size_t threads);
std::size_t threadCount();

/// Runs body(i) for every i in [0, count). Calls made from inside a worker
/// run serially on that worker. If any body throws, the exception of the
/// lowest failing index is rethrown after all workers finish.
void parallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

/// Fixed decomposition of [0, total) into blocks of `size`. Reductions over
/// blocks in block order are independent of the thread count.
struct Blocks {
  std::size_t total;
  std::size_t size = 1024;

  std::size_t count() const noexcept { return (total + size - 1) / size; }
  std::size_t begin(std::size_t b) const noexcept { return b * size; }
  std::size_t end(std::size_t b) const noexcept { return b * size + size < total ? b * size + size : total; }
};

}  // namespace pathfbsde
