#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "kboot/motion.hpp"
#include "kboot/sampling.hpp"
#include "support/oracles.hpp"

namespace sampling = kboot::sampling;

TEST_CASE("budget and ACS block at the default setting") {
  const auto mask = sampling::gaussian_mask(320, {}, 42);
  CHECK(mask.popcount() == 107);
  CHECK(mask.acs_count == 35);
  const auto [lo, hi] = sampling::acs_range(320, 35);
  CHECK(lo == 143);
  CHECK(hi == 178);
  for (std::size_t i = lo; i < hi; ++i) CHECK(mask.keep[i]);
}

TEST_CASE("ACS block is centred on floor(n/2)") {
  CHECK(sampling::acs_range(10, 4) == std::pair<std::size_t, std::size_t>{3, 7});
  CHECK(sampling::acs_range(11, 3) == std::pair<std::size_t, std::size_t>{4, 7});
  CHECK(sampling::acs_range(8, 0) == std::pair<std::size_t, std::size_t>{4, 4});
}

TEST_CASE("R = 1 keeps every line") {
  const auto mask = sampling::gaussian_mask(57, {.accel = 1.0}, 3);
  CHECK(mask.popcount() == 57);
}

TEST_CASE("parameter errors") {
  CHECK_THROWS_AS(sampling::gaussian_mask(100, {.accel = 10.0, .acs_frac = 0.11}, 0),
                  kboot::InfeasibleBudgetError);
  CHECK_THROWS_AS(sampling::gaussian_mask(100, {.accel = 0.5}, 0), kboot::ParameterError);
  CHECK_THROWS_AS(sampling::gaussian_mask(100, {.sigma_frac = 0.0}, 0), kboot::ParameterError);
  CHECK_THROWS_AS(sampling::gaussian_mask(1, {}, 0), kboot::DimensionError);
  // An infeasible budget is also a parameter error.
  CHECK_THROWS_AS(sampling::gaussian_mask(100, {.accel = 10.0}, 0), kboot::ParameterError);
}

TEST_CASE("masks are reproducible and distinct across branch seeds") {
  CHECK(sampling::gaussian_mask(128, {}, 43) == sampling::gaussian_mask(128, {}, 43));
  std::set<std::vector<bool>> seen;
  for (std::uint64_t n = 1; n <= 15; ++n) seen.insert(sampling::gaussian_mask(128, {}, 42 + n).keep);
  CHECK(seen.size() == 15);
}

TEST_CASE("property: popcount and ACS hold for random settings") {
  oracle::Gen gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen.index(300);
    const double accel = gen.uniform(1.0, 8.0);
    const double acs = gen.uniform(0.0, 1.0 / accel);
    const double sigma = gen.uniform(0.01, 1.0);
    const auto mask = sampling::gaussian_mask(n, {.accel = accel, .acs_frac = acs, .sigma_frac = sigma}, gen.next());
    const auto budget = static_cast<std::size_t>(std::lround(static_cast<double>(n) / accel));
    CHECK(mask.popcount() == std::max(budget, mask.acs_count));
    const auto [lo, hi] = sampling::acs_range(n, mask.acs_count);
    for (std::size_t i = lo; i < hi; ++i) CHECK(mask.keep[i]);
  }
}

TEST_CASE("narrow sigma still fills the budget") {
  const auto mask = sampling::gaussian_mask(200, {.accel = 2.0, .acs_frac = 0.0, .sigma_frac = 1e-4}, 1);
  CHECK(mask.popcount() == 100);
}

TEST_CASE("apply_mask zeroes dropped columns or rows") {
  oracle::Gen gen(3);
  const auto k = gen.complex_image(6, 8);
  auto mask = sampling::gaussian_mask(8, {.accel = 2.0, .acs_frac = 0.25}, 9);
  const auto cols = sampling::apply_mask(k, mask);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 8; ++c) CHECK(cols(r, c) == (mask.keep[c] ? k(r, c) : 0.0));
  }
  auto fe = sampling::gaussian_mask(6, {.accel = 2.0, .acs_frac = 0.0, .direction = sampling::Direction::frequency_encode}, 9);
  const auto rows = sampling::apply_mask(k, fe);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 8; ++c) CHECK(rows(r, c) == (fe.keep[r] ? k(r, c) : 0.0));
  }
  CHECK(sampling::apply_mask(k, sampling::full_mask(8)) == k);
  CHECK_THROWS_AS(sampling::apply_mask(k, sampling::full_mask(7)), kboot::DimensionError);
}

TEST_CASE("rejection statistics") {
  auto trace = kboot::motion::zero_trace(10);
  auto mask = sampling::full_mask(10);
  auto stats = sampling::rejection_stats(mask, trace);
  CHECK(stats.corrupted_total == 0);
  CHECK(stats.fraction_removed == 1.0);

  trace = kboot::motion::random_rigid_trace(10, 0.0, 2.0, 1);
  REQUIRE(trace.corrupted.size() == 9);  // only the DC line has k_y = 0
  CHECK(sampling::rejection_stats(mask, trace).fraction_removed == 0.0);
  for (std::size_t i = 0; i < 10; ++i) mask.keep[i] = i % 2 == 0;
  stats = sampling::rejection_stats(mask, trace);
  // lines 0, 2, 4, 6, 8 are kept and all of them are corrupted
  CHECK(stats.corrupted_sampled == 5);
  CHECK(stats.fraction_removed == doctest::Approx(4.0 / 9.0));
}

TEST_CASE("mask dump format") {
  std::vector<sampling::SamplingMask> masks{sampling::full_mask(3), sampling::gaussian_mask(4, {.accel = 2.0, .acs_frac = 0.0}, 1)};
  std::ostringstream out;
  sampling::write_masks(masks, out);
  const std::string text = out.str();
  CHECK(text.substr(0, 4) == "111\n");
  CHECK(text.size() == 9);
}

TEST_CASE("inclusion-probability oracle sums to the draw count") {
  const auto w = oracle::gaussian_line_weights(40, 10.0);
  const auto pi = oracle::inclusion_probabilities(w, 12, 100);
  double s = 0.0;
  for (double p : pi) s += p;
  CHECK(s == doctest::Approx(12.0).epsilon(1e-9));
  // Equal weights: every line has probability k/m.
  const auto flat = oracle::inclusion_probabilities(std::vector<double>(9, 0.3), 4, 100);
  for (double p : flat) CHECK(p == doctest::Approx(4.0 / 9.0).epsilon(1e-9));
}

TEST_CASE("per-line sampling frequency matches the inclusion probabilities") {
  constexpr std::size_t n = 64;
  const sampling::MaskParams params{.accel = 4.0, .acs_frac = 0.11, .sigma_frac = 0.25};
  const auto probe = sampling::gaussian_mask(n, params, 0);
  const auto [lo, hi] = sampling::acs_range(n, probe.acs_count);

  const auto all = oracle::gaussian_line_weights(n, 0.25 * n);
  std::vector<double> w;
  std::vector<std::size_t> free_lines;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= lo && i < hi) continue;
    free_lines.push_back(i);
    w.push_back(all[i]);
  }
  const auto pi = oracle::inclusion_probabilities(w, probe.popcount() - probe.acs_count);

  constexpr int kMasks = 20000;
  std::vector<int> hits(n, 0);
  for (int s = 0; s < kMasks; ++s) {
    const auto mask = sampling::gaussian_mask(n, params, 1000 + s);
    for (std::size_t i = 0; i < n; ++i) hits[i] += mask.keep[i];
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < free_lines.size(); ++j) {
    worst = std::max(worst, std::abs(hits[free_lines[j]] / double(kMasks) - pi[j]));
  }
  // 5 sigma of a Bernoulli(1/2) frequency over 20000 draws is about 0.018.
  CHECK(worst < 0.018);
}
