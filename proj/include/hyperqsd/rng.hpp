#pragma once

// Counter-based random numbers (Philox4x32-10). A stream is identified by a
// 64-bit key (the master seed) and a 64-bit stream id (the trajectory index);
// the remaining 64 counter bits index successive blocks. Any block of any
// stream can be computed independently, so ensembles are reproducible under
// any parallel schedule.

#include <array>
#include <complex>
#include <cstdint>

namespace hyperqsd {

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// One Philox4x32 block function evaluation with 10 rounds.
PhiloxBlock philox4x32(PhiloxBlock counter, std::array<std::uint32_t, 2> key) noexcept;

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  /// Block number `index` of this stream, without advancing.
  PhiloxBlock block(std::uint64_t index) const noexcept;
  PhiloxBlock next_block() noexcept { return block(position_++); }

  /// Two independent standard normals from one block (Box-Muller).
  std::array<double, 2> next_normal_pair() noexcept;

  /// Complex Wiener increment over `step`: sqrt(step/2) (g1 + i g2), so that
  /// E[dxi] = 0, E[|dxi|^2] = step and E[dxi^2] = 0.
  std::complex<double> next_wiener(double step) noexcept;

  std::uint64_t position() const noexcept { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
};

/// Uniform double in (0, 1] from 64 random bits.
double uniform_open_closed(std::uint64_t bits) noexcept;

}  // namespace hyperqsd
