#pragma once

#include <limits>
#include <optional>

#include "kboot/grid.hpp"

namespace kboot::metrics {

/// PSNR returned for identical images.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(peak^2 / MSE). `peak` defaults to max(reference). Identical images
/// give kInfinitePsnr.
double psnr(const Image& reference, const Image& test, std::optional<double> peak = std::nullopt);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  /// Dynamic range L; unset means max(reference), or 1 if that is not positive.
  std::optional<double> dynamic_range;
};

/// Mean SSIM over every Gaussian window that lies fully inside the image.
double ssim(const Image& reference, const Image& test, const SsimParams& params = {});

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

MetricReport evaluate(const Image& reference, const Image& test);

}  // namespace kboot::metrics
