#include "corrugate/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace corrugate {

unsigned worker_count() {
  if (const char* env = std::getenv("CORRUGATE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr std::size_t kMinChunk = 4096;

// Splits [0, count) into at most `workers` contiguous chunks and runs
// body(chunk_index, begin, end) on each.
void run_chunks(std::size_t count, std::size_t workers,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunk = (count + workers - 1) / workers;
  if (workers <= 1) {
    body(0, 0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(w, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t workers_for(std::size_t count) {
  return std::max<std::size_t>(
      1, std::min<std::size_t>(worker_count(), (count + kMinChunk - 1) / kMinChunk));
}

}  // namespace

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  run_chunks(count, workers_for(count),
             [&](std::size_t, std::size_t b, std::size_t e) { body(b, e); });
}

double parallel_max(std::size_t count, const std::function<double(std::size_t)>& f) {
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  if (count == 0) return lowest;
  const std::size_t workers = workers_for(count);
  std::vector<double> partial(workers, lowest);
  run_chunks(count, workers, [&](std::size_t w, std::size_t b, std::size_t e) {
    double m = lowest;
    for (std::size_t i = b; i < e; ++i) m = std::max(m, f(i));
    partial[w] = m;
  });
  return *std::max_element(partial.begin(), partial.end());
}

}  // namespace corrugate
