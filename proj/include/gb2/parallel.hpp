#pragma once

// Deterministic chunked parallelism. Work on n items is split into fixed-size
// chunks; each chunk derives everything it needs (including RNG substreams)
// from its chunk index alone, so results are identical for any thread count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <stdexcept>
#include <thread>
#include <vector>

namespace gb2::par {

inline constexpr std::size_t kChunkSize = 65536;

inline int resolve_threads(int requested) {
  if (requested < 0) throw std::domain_error("threads must be >= 0");
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Invokes fn(chunk_index, begin, end) for every chunk of [0, n), possibly
// concurrently. fn must only write to chunk-local state (e.g. slices of a
// preallocated buffer indexed by [begin, end)).
template <class Fn>
void for_each_chunk(std::size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  const std::size_t num_chunks = (n + kChunkSize - 1) / kChunkSize;
  const int workers = std::min<std::size_t>(resolve_threads(threads), num_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) {
      const std::size_t begin = c * kChunkSize;
      fn(c, begin, std::min(begin + kChunkSize, n));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= num_chunks || failed.load()) return;
      const std::size_t begin = c * kChunkSize;
      try {
        fn(c, begin, std::min(begin + kChunkSize, n));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(error);
}

}  // namespace gb2::par
