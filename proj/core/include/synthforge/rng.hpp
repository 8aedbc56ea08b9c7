#pragma once

#include <array>
#include <cstdint>

#include "synthforge/vec.hpp"

namespace synthforge {

/// SplitMix64 finalizer. Used to derive child seeds; not a generator on its own.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Folds a sequence of identifiers into a seed. derive_seed(s, a, b) names the
/// stream "b under a under s"; different paths give unrelated seeds.
template <typename... Ids>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ids... ids) {
  std::uint64_t h = mix64(seed);
  ((h = mix64(h ^ mix64(static_cast<std::uint64_t>(ids) + 0x632BE59BD9B4E019ULL))), ...);
  return h;
}

/// Counter-based generator (Philox4x32-10) keyed by a 64-bit seed, with a
/// 64-bit stream id and 64-bit block counter in the counter word. Draw
/// sequences depend only on (seed, stream, counter), so parallel workers that
/// own distinct streams produce the same values under any schedule.
///
/// All floating-point draws are built from integer bits by hand; the output is
/// identical on every platform with IEEE doubles. Normal draws additionally
/// use std::log/std::cos.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  /// Number of 128-bit blocks consumed so far.
  std::uint64_t counter() const { return counter_; }

  /// Independent stream for a sub-task, e.g. one image of a class.
  RngStream child(std::uint64_t id) const { return {derive_seed(seed_, stream_), id}; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// true with probability p.
  bool bernoulli(double p) { return uniform01() < p; }
  /// Standard normal via Box-Muller (one value per call, no cached state).
  double normal();

  /// Uniformly distributed rotation (Shoemake's method).
  Quat rotation();
  /// Uniform point on the unit sphere.
  Vec3 unit_vector();

  /// Raw Philox4x32-10 block for the given key and counter words.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace synthforge
