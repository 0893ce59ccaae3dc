#pragma once

#include <cstdint>
#include <random>

namespace htmrl {

/// RNG engine used throughout the library. One engine per logical stream;
/// engines are never shared across threads.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Good avalanche behaviour, stateless.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed from (master seed, stream id, index).
///
/// Counter-based: the seed for (stream, index) depends only on those values,
/// so adding repeats to a run never perturbs the streams of earlier ones,
/// and distinct streams (e.g. environment vs. agent) stay decoupled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  std::uint64_t h = splitmix64(master ^ 0xD1B54A32D192ED03ULL);
  h = splitmix64(h ^ stream);
  return splitmix64(h ^ index);
}

/// Uniform integer in [0, bound) drawn from `rng`.
inline std::size_t uniform_below(Rng& rng, std::size_t bound) {
  std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
  return dist(rng);
}

}  // namespace htmrl
