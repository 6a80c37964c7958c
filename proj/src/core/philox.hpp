#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace errcal::rng {

// ============================================================================
// Philox4x32-10 counter-based generator.
//
// Every random number is a pure function of (key, counter), so parallel
// workers can draw from disjoint substreams without shared state and a run
// is reproducible for a given seed regardless of scheduling.  Substreams are
// laid out as counter = (step, path_lo, path_hi, stream); the 64-bit seed is
// the key.
// ============================================================================

struct PhiloxState {
  std::array<std::uint32_t, 4> counter{0u, 0u, 0u, 0u};
  std::array<std::uint32_t, 2> key{0u, 0u};
};

namespace detail {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline void philox_round(std::array<std::uint32_t, 4>& c,
                         const std::array<std::uint32_t, 2>& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mul_hi_lo(kPhiloxM4x32A, c[0], hi0, lo0);
  mul_hi_lo(kPhiloxM4x32B, c[2], hi1, lo1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

/// One 10-round Philox4x32 block: 128 counter bits -> 128 random bits.
[[nodiscard]] inline std::array<std::uint32_t, 4> philox4x32(
    std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    detail::philox_round(counter, key);
    key[0] += detail::kPhiloxW32A;
    key[1] += detail::kPhiloxW32B;
  }
  return counter;
}

/// Distinct stream constants keep independent uses of the same seed apart.
enum class Stream : std::uint32_t {
  kPathIncrement = 0x01u,   // Brownian dB
  kCompanion = 0x02u,       // companion dB (independent copy)
  kInnerPath = 0x03u,       // nested Monte Carlo inner increments
  kUniform = 0x04u,         // (0,1)^N samples for the discrete scheme
  kScratch = 0x05u,         // test-local draws
};

/// Deterministic substream addressed by (seed, stream, index64, step).
/// Each block yields two independent N(0,1) variates via Box-Muller.
class GaussianBlock {
 public:
  GaussianBlock(std::uint64_t seed, Stream stream, std::uint64_t index,
                std::uint32_t step) {
    const std::array<std::uint32_t, 4> ctr{
        step, static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(stream)};
    const std::array<std::uint32_t, 2> key{
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32)};
    bits_ = philox4x32(ctr, key);
  }

  /// Uniform in the open interval (0,1): 53-bit mantissa, offset half-ulp.
  [[nodiscard]] double uniform(int lane) const {
    const std::uint64_t hi = bits_[2 * lane];
    const std::uint64_t lo = bits_[2 * lane + 1];
    const std::uint64_t u = (hi << 32) | lo;
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Box-Muller pair; z(0) and z(1) are independent standard normals.
  [[nodiscard]] double z(int lane) const {
    const double u1 = uniform(0);
    const double u2 = uniform(1);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    return lane == 0 ? rad * std::cos(ang) : rad * std::sin(ang);
  }

 private:
  std::array<std::uint32_t, 4> bits_;
};

/// Single standard normal for (seed, stream, index, step), lane selectable.
[[nodiscard]] inline double gaussian(std::uint64_t seed, Stream stream,
                                     std::uint64_t index, std::uint32_t step,
                                     int lane = 0) {
  return GaussianBlock(seed, stream, index, step).z(lane);
}

/// Single uniform on (0,1) for (seed, stream, index, step).
[[nodiscard]] inline double uniform01(std::uint64_t seed, Stream stream,
                                      std::uint64_t index, std::uint32_t step,
                                      int lane = 0) {
  return GaussianBlock(seed, stream, index, step).uniform(lane);
}

}  // namespace errcal::rng
