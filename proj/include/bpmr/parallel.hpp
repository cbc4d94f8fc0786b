#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace bpmr {

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return chunk_size == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

inline IndexRange chunk_range(std::size_t n, std::size_t chunk_size, std::size_t chunk) {
  std::size_t b = chunk * chunk_size;
  return {b, std::min(n, b + chunk_size)};
}

// Runs fn(chunk_index, range, worker) over [0, n) split into fixed-size
// chunks. Workers pull chunks from a shared counter, so callers must write
// results into per-chunk slots and reduce them in chunk order afterwards.
// If several chunks throw, the exception of the lowest chunk index wins.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunk_size, std::size_t threads, Fn&& fn) {
  const std::size_t chunks = chunk_count(n, chunk_size);
  if (chunks == 0) return;
  threads = std::clamp<std::size_t>(threads, 1, chunks);

  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&](std::size_t w) {
    while (!failed.load(std::memory_order_relaxed)) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) break;
      try {
        fn(c, chunk_range(n, chunk_size, c), w);
      } catch (...) {
        errors[c] = std::current_exception();
        failed = true;
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::size_t default_thread_count() {
  auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace bpmr
