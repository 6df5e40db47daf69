#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace riskstrat::detail {

inline unsigned resolve_workers(unsigned requested, std::size_t count) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency())
                              : requested;
  if (count < w) w = static_cast<unsigned>(std::max<std::size_t>(count, 1));
  return w;
}

// Calls body(i) for every i in [0, count), split into contiguous chunks across
// workers. body must only write to slot i of its output. The first exception
// thrown by any worker is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  const unsigned w = resolve_workers(workers, count);
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(w);
    const std::size_t chunk = (count + w - 1) / w;
    for (unsigned t = 0; t < w; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace riskstrat::detail
