#pragma once

#include <array>
#include <cstdint>

namespace semtask {

/// Named substreams. Class-set draws and instance draws never share state,
/// so changing the instance sampler cannot perturb which classes are drawn.
enum class Stream : std::uint64_t {
  ClassDraws = 1,
  InstanceDraws = 2,
  Synthesis = 3,
};

/// xoshiro256** with SplitMix64 seeding.
///
/// All derived quantities (uniform doubles, bounded integers, normals) are
/// computed here from raw 64-bit output rather than through <random>
/// distributions, whose algorithms differ between standard libraries.
/// Same seed, same bytes, on every platform.
///
/// Substreams: the state for (seed, stream, index) is seeded from
/// splitmix64(splitmix64(seed) ^ splitmix64(stream << 32 | low32(index)) + (index >> 32)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

  std::uint64_t next() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, bound). `bound` must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal (Box-Muller, no cached second variate).
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace semtask
