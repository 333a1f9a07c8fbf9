#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace hypercal {

/// Worker count: HYPERCAL_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Tasks must write disjoint outputs; the
/// first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t max_threads = 0);

/// SplitMix64 finalizer; used to derive independent per-task seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for pixel (row, col): global seed xor a hash of the coordinates.
constexpr std::uint64_t pixel_seed(std::uint64_t global_seed, std::size_t row,
                                   std::size_t col) noexcept {
  return global_seed ^ mix64((static_cast<std::uint64_t>(row) << 32) ^
                             static_cast<std::uint64_t>(col));
}

}  // namespace hypercal
