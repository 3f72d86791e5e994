#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace genokit {

/// Number of worker threads used by library kernels. 0 restores the default
/// (hardware concurrency).
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(chunk_begin, chunk_end) over [begin, end) split into chunks of
/// `grain` items. Chunk boundaries depend only on `grain`, never on the thread
/// count, so callers that write disjoint outputs per chunk get bit-identical
/// results for any number of threads.
void parallel_for(std::size_t begin, std::size_t end, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Independent RNG seed for stream `stream` of a run seeded with `seed`
/// (splitmix64 finalizer), so parallel work units draw reproducible numbers.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(seed ^ mix(stream));
}

}  // namespace genokit
