#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace pisd {

// Philox4x32-10 (Salmon et al., SC'11): a stateless bijection from a 128-bit
// counter and 64-bit key to 128 random bits.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

// Gaussian deviates addressed by (seed, stream, step, block). Each block
// yields two independent standard normals, so a draw never depends on how
// many other draws were made before it.
class CounterNormal {
 public:
  CounterNormal(std::uint64_t seed, std::uint32_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::array<double, 2> pair(std::uint64_t step, std::uint32_t block) const noexcept {
    const auto bits = Philox4x32::generate(
        {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream_, block}, key_);
    // 53-bit uniforms; u1 in (0, 1] keeps the logarithm finite.
    const double u1 = (static_cast<double>(((std::uint64_t{bits[0]} << 32 | bits[1]) >> 11)) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>((std::uint64_t{bits[2]} << 32 | bits[3]) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  // Uniform in [0, 1), from the same counter space (block values disjoint from pair()).
  std::array<double, 2> uniform_pair(std::uint64_t step, std::uint32_t block) const noexcept {
    const auto bits = Philox4x32::generate(
        {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream_, block}, key_);
    return {static_cast<double>((std::uint64_t{bits[0]} << 32 | bits[1]) >> 11) * 0x1.0p-53,
            static_cast<double>((std::uint64_t{bits[2]} << 32 | bits[3]) >> 11) * 0x1.0p-53};
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
};

}  // namespace pisd
