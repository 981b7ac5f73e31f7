#include "pathfbsde/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace pathfbsde {

namespace {

std::atomic<std::size_t> configuredThreads{0};
thread_local bool insideWorker = false;

}  // namespace

void setThreadCount(std::size_t threads) { configuredThreads = threads; }

std::size_t threadCount() {
  const std::size_t n = configuredThreads.load();
  if (n != 0) return n;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallelFor(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(threadCount(), count);
  if (workers <= 1 || insideWorker) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex failureMutex;
  std::size_t failedIndex = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  auto work = [&] {
    insideWorker = true;
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failureMutex);
        if (i < failedIndex) {
          failedIndex = i;
          failure = std::current_exception();
        }
      }
    }
    insideWorker = false;
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pathfbsde
