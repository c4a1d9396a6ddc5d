#include "kboot/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kboot/compensated.hpp"

namespace kboot::metrics {

namespace {

double max_value(const Image& img) {
  return *std::max_element(img.values().begin(), img.values().end());
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = 0.5 * (size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    k[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    total += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= total;
  return k;
}

}  // namespace

double psnr(const Image& reference, const Image& test, std::optional<double> peak) {
  require_same_shape(reference, test, "psnr");
  if (reference.size() == 0) throw DimensionError("psnr: empty image");
  const double p = peak.value_or(max_value(reference));
  if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError(fmt::format("psnr: peak {} must be > 0", p));

  CompensatedSum sq;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - test[i];
    sq.add(d * d);
  }
  const double mse = sq.value() / static_cast<double>(reference.size());
  if (mse == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(p * p / mse);
}

double ssim(const Image& reference, const Image& test, const SsimParams& params) {
  require_same_shape(reference, test, "ssim");
  if (params.window < 1 || !(params.sigma > 0.0)) throw ParameterError("ssim: invalid window");
  const auto win = static_cast<std::size_t>(params.window);
  if (reference.n_fe() < win || reference.n_pe() < win) {
    throw DimensionError(fmt::format("ssim: {}x{} image smaller than the {}x{} window",
                                     reference.n_fe(), reference.n_pe(), win, win));
  }

  double range = params.dynamic_range.value_or(max_value(reference));
  if (!params.dynamic_range && !(range > 0.0)) range = 1.0;
  if (!(range > 0.0)) throw ParameterError("ssim: dynamic range must be > 0");
  const double c1 = (params.k1 * range) * (params.k1 * range);
  const double c2 = (params.k2 * range) * (params.k2 * range);

  const std::vector<double> k1d = gaussian_kernel(params.window, params.sigma);
  std::vector<double> w(win * win);
  for (std::size_t a = 0; a < win; ++a) {
    for (std::size_t b = 0; b < win; ++b) w[a * win + b] = k1d[a] * k1d[b];
  }

  CompensatedSum total;
  std::size_t count = 0;
  for (std::size_t r0 = 0; r0 + win <= reference.n_fe(); ++r0) {
    for (std::size_t c0 = 0; c0 + win <= reference.n_pe(); ++c0) {
      double mx = 0.0, my = 0.0;
      for (std::size_t a = 0; a < win; ++a) {
        for (std::size_t b = 0; b < win; ++b) {
          mx += w[a * win + b] * reference(r0 + a, c0 + b);
          my += w[a * win + b] * test(r0 + a, c0 + b);
        }
      }
      // Centred second moments; avoids cancellation on flat patches.
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (std::size_t a = 0; a < win; ++a) {
        for (std::size_t b = 0; b < win; ++b) {
          const double dx = reference(r0 + a, c0 + b) - mx;
          const double dy = test(r0 + a, c0 + b) - my;
          vx += w[a * win + b] * dx * dx;
          vy += w[a * win + b] * dy * dy;
          cxy += w[a * win + b] * dx * dy;
        }
      }
      const double num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      total.add(num / den);
      ++count;
    }
  }
  return total.value() / static_cast<double>(count);
}

MetricReport evaluate(const Image& reference, const Image& test) {
  return {psnr(reference, test), ssim(reference, test)};
}

}  // namespace kboot::metrics
