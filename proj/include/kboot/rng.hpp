#pragma once

#include <cstdint>

namespace kboot {

/// Counter-based 64-bit generator: draw i is splitmix64(key + i * gamma).
/// The i-th value depends only on (seed, stream, i), so results do not
/// depend on how callers interleave draws across threads.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(seed ^ mix(stream + kGamma))) {}

  std::uint64_t next_u64() noexcept { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on the open interval (lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform_open(); }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream identifiers so that different consumers of one seed never share draws.
namespace rng_stream {
inline constexpr std::uint64_t kMotion = 0x6d6f74696f6eULL;
inline constexpr std::uint64_t kMotionParams = 0x6d6f74706172ULL;
inline constexpr std::uint64_t kMask = 0x6d61736bULL;
inline constexpr std::uint64_t kPhantom = 0x7068616eULL;
inline constexpr std::uint64_t kPropcheck = 0x70726f70ULL;
}  // namespace rng_stream

}  // namespace kboot
