#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "placeorigin/hashing.hpp"

namespace placeorigin {

/// Portable deterministic generator. The standard distributions are
/// implementation-defined, so bounded draws and normals are done here to keep
/// emitted datasets byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Child stream for an independent unit of work (e.g. one question).
  static Rng split(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % bound;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
};

/// Draws min(count, pool.size()) distinct elements of `pool` (partial
/// Fisher-Yates); order follows the draw sequence.
template <typename T>
std::vector<T> sample_without_replacement(std::span<const T> pool,
                                          std::size_t count, Rng& rng) {
  std::vector<T> work(pool.begin(), pool.end());
  const std::size_t n = std::min(count, work.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(work.size() - i));
    std::swap(work[i], work[j]);
  }
  work.resize(n);
  return work;
}

}  // namespace placeorigin
