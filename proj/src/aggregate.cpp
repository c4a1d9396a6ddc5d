#include "kboot/aggregate.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <thread>

#include "kboot/compensated.hpp"
#include "kboot/fft.hpp"

namespace kboot::aggregate {

namespace {

void check_weights(std::span<const double> weights, std::size_t expected) {
  if (weights.size() != expected) {
    throw ConfigError(fmt::format("aggregation: {} weights given for {} branches", weights.size(), expected));
  }
  CompensatedSum total;
  for (const double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError(fmt::format("aggregation: weight {} is negative", w));
    total.add(w);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("aggregation: weights sum to {:.17g}, expected 1", total.value()));
  }
}

double squared_distance(const Image& a, const Image& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s.add(d * d);
  }
  return s.value();
}

unsigned worker_count(unsigned requested, std::size_t branches) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(n, branches));
}

}  // namespace

std::vector<double> resolved_weights(const AggregationConfig& config) {
  if (config.branches < 1) throw ConfigError("aggregation: need at least one branch");
  if (config.weights.empty()) {
    return std::vector<double>(config.branches, 1.0 / static_cast<double>(config.branches));
  }
  check_weights(config.weights, config.branches);
  return config.weights;
}

Image weighted_sum(std::span<const Image> images, std::span<const double> weights) {
  if (images.empty()) throw ConfigError("weighted_sum: no images");
  if (images.size() != weights.size()) throw ConfigError("weighted_sum: image/weight count mismatch");
  for (const auto& img : images) require_same_shape(img, images.front(), "weighted_sum");

  // Anchored at the first image: x_1 + sum_n w_n (x_n - x_1). Equal to
  // sum_n w_n x_n for weights summing to 1, and exact when all images agree.
  const Image& anchor = images.front();
  Image out(anchor.n_fe(), anchor.n_pe());
  for (std::size_t p = 0; p < out.size(); ++p) {
    CompensatedSum acc;
    for (std::size_t n = 1; n < images.size(); ++n) acc.add(weights[n] * (images[n][p] - anchor[p]));
    out[p] = anchor[p] + acc.value();
  }
  return out;
}

AggregationResult bootstrap_correct_kspace(const KSpace& kspace, const AggregationConfig& config) {
  require_valid(kspace, "bootstrap_correct");
  const std::vector<double> weights = resolved_weights(config);
  if (!config.recon) throw ConfigError("aggregation: no reconstructor configured");

  const std::size_t n = config.branches;
  const std::size_t lines =
      config.mask.direction == sampling::Direction::phase_encode ? kspace.n_pe() : kspace.n_fe();

  AggregationResult result;
  result.branch_masks.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    result.branch_masks.push_back(sampling::gaussian_mask(lines, config.mask, config.base_seed + b + 1));
  }

  std::vector<Image> images(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t b = next++; b < n; b = next++) {
      try {
        const auto& mask = result.branch_masks[b];
        images[b] = config.recon->reconstruct(sampling::apply_mask(kspace, mask), mask);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };

  const unsigned workers = worker_count(config.threads, n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  result.corrected = weighted_sum(images, weights);
  if (config.keep_branch_images) result.branch_images = std::move(images);
  return result;
}

AggregationResult bootstrap_correct(const Image& corrupted, const AggregationConfig& config) {
  require_valid(corrupted, "bootstrap_correct");
  return bootstrap_correct_kspace(fft::forward(corrupted), config);
}

JensenReport jensen_check(const Image& truth, std::span<const Image> estimates,
                          std::span<const double> weights) {
  if (estimates.empty()) throw ConfigError("jensen_check: no estimates");
  check_weights(weights, estimates.size());
  for (const auto& e : estimates) require_same_shape(e, truth, "jensen_check");

  // Same anchoring as weighted_sum, so identical estimates give lhs == rhs.
  const double first = squared_distance(truth, estimates.front());
  CompensatedSum spread;
  for (std::size_t n = 1; n < estimates.size(); ++n) {
    spread.add(weights[n] * (squared_distance(truth, estimates[n]) - first));
  }

  JensenReport report;
  report.lhs = first + spread.value();
  report.rhs = squared_distance(truth, weighted_sum(estimates, weights));
  report.holds = report.lhs >= report.rhs - 1e-9 * report.lhs;
  return report;
}

void write_jensen_row(const JensenReport& report, std::ostream& out) {
  fmt::print(out, "{:.17g},{:.17g},{}\n", report.lhs, report.rhs, report.holds ? "true" : "false");
}

}  // namespace kboot::aggregate
