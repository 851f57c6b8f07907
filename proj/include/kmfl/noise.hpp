#pragma once

#include <array>
#include <cstdint>

namespace kmfl {

/// Philox4x32-10 block: maps a 128-bit counter under a 64-bit key to 128
/// pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless Gaussian noise source. Every draw is a pure function of
/// (seed, step, particle, coordinate), so results do not depend on
/// evaluation order or thread count.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Standard normal draw.
  double normal(std::uint64_t step, std::uint32_t particle, std::uint32_t coord) const;

  /// Uniform draw on the open interval (0, 1).
  double uniform(std::uint64_t step, std::uint32_t particle, std::uint32_t coord) const;

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t step, std::uint32_t particle, std::uint32_t coord,
                              std::uint64_t n) const;

  /// Child stream whose seed is an injective function of (seed, tag).
  NoiseStream derive(std::uint64_t tag) const { return NoiseStream(seed_ ^ mix64(tag + 1)); }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint32_t particle,
                                     std::uint32_t coord) const;

  std::uint64_t seed_;
};

}  // namespace kmfl
