#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "kboot/grid.hpp"
#include "kboot/motion.hpp"

namespace kboot::sampling {

/// Which k-space axis a mask removes lines from. Frequency-encode masks exist
/// only to demonstrate that they do not reject motion outliers.
enum class Direction { phase_encode, frequency_encode };

/// ACS fractions used for brain-like and liver-like data.
inline constexpr double kBrainAcsFraction = 0.06;
inline constexpr double kLiverAcsFraction = 0.11;

struct MaskParams {
  double accel = 3.0;        ///< acceleration factor R >= 1
  double acs_frac = kLiverAcsFraction;
  double sigma_frac = 0.25;  ///< Gaussian width as a fraction of the line count
  Direction direction = Direction::phase_encode;
};

struct SamplingMask {
  std::vector<bool> keep;
  double accel = 1.0;
  std::size_t acs_count = 0;
  Direction direction = Direction::phase_encode;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return keep.size(); }
  std::size_t popcount() const noexcept;

  friend bool operator==(const SamplingMask&, const SamplingMask&) = default;
};

/// Mask that keeps every line.
SamplingMask full_mask(std::size_t lines, Direction direction = Direction::phase_encode);

/// First and one-past-last index of the ACS block of `acs_count` lines
/// centred on line floor(lines/2).
std::pair<std::size_t, std::size_t> acs_range(std::size_t lines, std::size_t acs_count);

/// Unnormalised sampling weight of each line: exp(-(i - centre)^2 / (2 sigma^2)).
std::vector<double> gaussian_weights(std::size_t lines, double sigma_frac);

/// 1D Gaussian random mask: the ACS block plus round(lines/R) - acs_count further
/// lines drawn one at a time without replacement, each draw proportional to the
/// Gaussian weight of the lines not yet chosen.
SamplingMask gaussian_mask(std::size_t lines, const MaskParams& params, std::uint64_t seed);

/// Zero every dropped line; kept lines are copied unchanged. The mask's
/// direction selects whether columns (phase encode) or rows are masked.
KSpace apply_mask(KSpace kspace, const SamplingMask& mask);

struct RejectionStats {
  std::size_t corrupted_total = 0;
  std::size_t corrupted_sampled = 0;
  double fraction_removed = 1.0;
};

/// How many motion-corrupted phase-encode lines a mask discards.
RejectionStats rejection_stats(const SamplingMask& mask, const motion::MotionTrace& trace);

/// One line of '0'/'1' characters per mask.
void write_masks(std::span<const SamplingMask> masks, std::ostream& out);

}  // namespace kboot::sampling
