#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "kboot/grid.hpp"
#include "kboot/recon.hpp"
#include "kboot/sampling.hpp"

namespace kboot::aggregate {

inline constexpr std::size_t kDefaultBranches = 15;

struct AggregationConfig {
  std::size_t branches = kDefaultBranches;
  /// Non-negative, summing to 1. Empty means uniform 1/N.
  std::vector<double> weights;
  std::uint64_t base_seed = 42;
  sampling::MaskParams mask;
  std::shared_ptr<const recon::Reconstructor> recon;
  bool keep_branch_images = false;
  /// Worker threads for the branches; 0 picks the hardware concurrency.
  unsigned threads = 1;
};

struct AggregationResult {
  Image corrected;
  std::vector<Image> branch_images;  ///< empty unless keep_branch_images
  std::vector<sampling::SamplingMask> branch_masks;
};

/// Weights the config resolves to; throws ConfigError when they are invalid.
std::vector<double> resolved_weights(const AggregationConfig& config);

/// Bootstrap subsampling and aggregation of a corrupted magnitude image:
/// for n = 1..N draw mask L_n with seed base_seed + n, reconstruct from
/// L_n F x, and return sum_n w_n G(L_n F x). Branches may run in parallel;
/// the reduction is always in branch order.
AggregationResult bootstrap_correct(const Image& corrupted, const AggregationConfig& config);

/// Same, starting from measured k-space instead of an image.
AggregationResult bootstrap_correct_kspace(const KSpace& kspace, const AggregationConfig& config);

/// Pixelwise sum_n w_n x_n, accumulated as x_1 + sum_n w_n (x_n - x_1) with
/// compensated summation in index order.
Image weighted_sum(std::span<const Image> images, std::span<const double> weights);

struct JensenReport {
  double lhs = 0.0;  ///< sum_n w_n ||x* - x_n||^2
  double rhs = 0.0;  ///< ||x* - sum_n w_n x_n||^2
  bool holds = false;
};

/// Checks that aggregating estimates never increases squared error:
/// holds = lhs >= rhs - 1e-9 * lhs.
JensenReport jensen_check(const Image& truth, std::span<const Image> estimates,
                          std::span<const double> weights);

/// `lhs,rhs,holds` row, no header.
void write_jensen_row(const JensenReport& report, std::ostream& out);

}  // namespace kboot::aggregate
