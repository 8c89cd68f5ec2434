#pragma once

// Counter-based random number generation for reproducible, splittable Monte
// Carlo streams: Philox4x32-10 (Salmon, Moraes, Dror, Shaw 2011). The key is
// the 64-bit seed; counter words 2..3 carry the stream id (one stream per
// Monte Carlo batch), words 0..1 the block counter within the stream. Seeds
// are therefore portable across platforms and implementations.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace oofsk {

class Philox4x32 {
 public:
  Philox4x32() : Philox4x32(0, 0) {}
  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  // One 10-round block: 4 x 32 output words for a given block index.
  std::array<std::uint32_t, 4> block(std::uint64_t block_index) const {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_index);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_index >> 32);
    std::uint32_t c2 = stream_lo_;
    std::uint32_t c3 = stream_hi_;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = kMul0 * static_cast<std::uint64_t>(c0);
      const std::uint64_t p1 = kMul1 * static_cast<std::uint64_t>(c2);
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
  }

  std::uint64_t next_u64() {
    if (!have_half_) {
      const auto words = block(block_index_++);
      half_ = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
      have_half_ = true;
      return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    }
    have_half_ = false;
    return half_;
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe under log().
  double next_double_open0() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generated in pairs, one cached.
  double next_gaussian() {
    if (have_gaussian_) {
      have_gaussian_ = false;
      return cached_gaussian_;
    }
    const double u1 = next_double_open0();
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_gaussian_ = radius * std::sin(angle);
    have_gaussian_ = true;
    return radius * std::cos(angle);
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2511F53;
  static constexpr std::uint64_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  std::uint32_t key0_ = 0;
  std::uint32_t key1_ = 0;
  std::uint32_t stream_lo_ = 0;
  std::uint32_t stream_hi_ = 0;
  std::uint64_t block_index_ = 0;
  std::uint64_t half_ = 0;
  bool have_half_ = false;
  bool have_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

}  // namespace oofsk
