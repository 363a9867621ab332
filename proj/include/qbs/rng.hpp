#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qbs {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is a
// pure function of (key, counter), so paths can be advanced in any order or on
// any number of threads without changing a single bit of output.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Uniform in the open interval (0, 1) from 64 random bits. 52-bit resolution
/// keeps the largest value, 1 - 2^-53, representable (53 bits would round it to 1).
constexpr double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

struct NormalPair {
  double z1;  // price component
  double z2;  // spread component
};

/// Stream tags separate independent uses of the same (seed, path, step) triple.
enum class StreamTag : std::uint32_t { Increment = 0 };

/// Two independent standard normals for one (path, step), via Box-Muller on a
/// single Philox block keyed by the master seed.
inline NormalPair normal_pair(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                              StreamTag tag = StreamTag::Increment) noexcept {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path),
                                static_cast<std::uint32_t>(path >> 32),
                                static_cast<std::uint32_t>(step),
                                static_cast<std::uint32_t>(tag)};
  const auto w = Philox4x32::generate(ctr, key);
  const double u1 = open_unit((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
  const double u2 = open_unit((static_cast<std::uint64_t>(w[2]) << 32) | w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace qbs
