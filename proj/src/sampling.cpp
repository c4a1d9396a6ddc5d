#include "kboot/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "kboot/rng.hpp"

namespace kboot::sampling {

std::size_t SamplingMask::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
}

SamplingMask full_mask(std::size_t lines, Direction direction) {
  SamplingMask mask;
  mask.keep.assign(lines, true);
  mask.accel = 1.0;
  mask.acs_count = lines;
  mask.direction = direction;
  return mask;
}

std::pair<std::size_t, std::size_t> acs_range(std::size_t lines, std::size_t acs_count) {
  const std::size_t centre = lines / 2;
  const std::size_t lo = centre - std::min(centre, acs_count / 2);
  const std::size_t hi = std::min(lines, lo + acs_count);
  return {lo, hi};
}

std::vector<double> gaussian_weights(std::size_t lines, double sigma_frac) {
  const double sigma = sigma_frac * static_cast<double>(lines);
  const double centre = static_cast<double>(lines / 2);
  std::vector<double> w(lines);
  for (std::size_t i = 0; i < lines; ++i) {
    const double d = static_cast<double>(i) - centre;
    w[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  return w;
}

SamplingMask gaussian_mask(std::size_t lines, const MaskParams& params, std::uint64_t seed) {
  if (lines < 2) throw DimensionError("gaussian_mask: need at least 2 lines");
  if (!(params.accel >= 1.0) || !std::isfinite(params.accel)) {
    throw ParameterError(fmt::format("gaussian_mask: R = {} must be >= 1", params.accel));
  }
  if (!(params.acs_frac >= 0.0 && params.acs_frac <= 1.0)) {
    throw ParameterError(fmt::format("gaussian_mask: acs fraction {} outside [0, 1]", params.acs_frac));
  }
  if (!(params.sigma_frac > 0.0) || !std::isfinite(params.sigma_frac)) {
    throw ParameterError(fmt::format("gaussian_mask: sigma fraction {} must be > 0", params.sigma_frac));
  }
  const double n = static_cast<double>(lines);
  if (params.acs_frac * n > n / params.accel) {
    throw InfeasibleBudgetError(fmt::format(
        "gaussian_mask: ACS block of {:.6g} lines exceeds the budget of {:.6g} lines at R = {}",
        params.acs_frac * n, n / params.accel, params.accel));
  }

  const auto budget = static_cast<std::size_t>(std::lround(n / params.accel));
  const auto acs = static_cast<std::size_t>(std::lround(params.acs_frac * n));

  SamplingMask mask;
  mask.keep.assign(lines, false);
  mask.accel = params.accel;
  mask.acs_count = acs;
  mask.direction = params.direction;
  mask.seed = seed;

  const auto [lo, hi] = acs_range(lines, acs);
  for (std::size_t i = lo; i < hi; ++i) mask.keep[i] = true;

  const std::vector<double> weight = gaussian_weights(lines, params.sigma_frac);
  const std::size_t centre = lines / 2;

  CounterRng rng(seed, rng_stream::kMask);
  for (std::size_t drawn = acs; drawn < budget; ++drawn) {
    double total = 0.0;
    for (std::size_t i = 0; i < lines; ++i) {
      if (!mask.keep[i]) total += weight[i];
    }
    const double target = rng.uniform_open() * total;

    std::size_t pick = lines;
    if (total > 0.0) {
      // Walk the cumulative weights; the last available line absorbs any
      // rounding that leaves the target past the final partial sum.
      double acc = 0.0;
      for (std::size_t i = 0; i < lines; ++i) {
        if (mask.keep[i] || weight[i] == 0.0) continue;
        pick = i;
        acc += weight[i];
        if (target < acc) break;
      }
    } else {
      // Every remaining weight underflowed (very narrow sigma): take the
      // free line nearest the centre, the limit of the Gaussian draw.
      for (std::size_t i = 0; i < lines; ++i) {
        if (mask.keep[i]) continue;
        const auto dist = [centre](std::size_t j) { return j > centre ? j - centre : centre - j; };
        if (pick == lines || dist(i) < dist(pick)) pick = i;
      }
    }
    mask.keep[pick] = true;
  }
  return mask;
}

KSpace apply_mask(KSpace kspace, const SamplingMask& mask) {
  const bool columns = mask.direction == Direction::phase_encode;
  const std::size_t axis_len = columns ? kspace.n_pe() : kspace.n_fe();
  if (mask.size() != axis_len) {
    throw DimensionError(fmt::format("apply_mask: mask length {} != masked axis length {}",
                                     mask.size(), axis_len));
  }
  for (std::size_t r = 0; r < kspace.n_fe(); ++r) {
    for (std::size_t c = 0; c < kspace.n_pe(); ++c) {
      if (!mask.keep[columns ? c : r]) kspace(r, c) = 0.0;
    }
  }
  return kspace;
}

RejectionStats rejection_stats(const SamplingMask& mask, const motion::MotionTrace& trace) {
  if (mask.size() != trace.size()) {
    throw DimensionError(fmt::format("rejection_stats: mask length {} != trace length {}",
                                     mask.size(), trace.size()));
  }
  RejectionStats stats;
  stats.corrupted_total = trace.corrupted.size();
  for (const std::size_t i : trace.corrupted) {
    if (mask.keep[i]) ++stats.corrupted_sampled;
  }
  stats.fraction_removed =
      stats.corrupted_total == 0
          ? 1.0
          : 1.0 - static_cast<double>(stats.corrupted_sampled) /
                      static_cast<double>(stats.corrupted_total);
  return stats;
}

void write_masks(std::span<const SamplingMask> masks, std::ostream& out) {
  for (const auto& mask : masks) {
    std::string line(mask.size(), '0');
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask.keep[i]) line[i] = '1';
    }
    out << line << '\n';
  }
}

}  // namespace kboot::sampling
