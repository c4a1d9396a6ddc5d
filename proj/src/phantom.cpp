#include "kboot/phantom.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "kboot/rng.hpp"

namespace kboot::phantom {

namespace {

constexpr double deg(double d) { return d * std::numbers::pi / 180.0; }

//                          x0     y0      a       b       angle      intensity
constexpr std::array<EllipseSpec, 10> kSheppLogan{{
    {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
    {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
    {0.22, 0.0, 0.11, 0.31, deg(-18.0), -0.2},
    {-0.22, 0.0, 0.16, 0.41, deg(18.0), -0.2},
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
    {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
    {0.0, -0.605, 0.023, 0.023, 0.0, 0.1},
    {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
}};

void check_size(std::size_t n, const char* what) {
  if (n < 16) throw ParameterError(fmt::format("{}: side length {} must be >= 16", what, n));
}

}  // namespace

std::span<const EllipseSpec> shepp_logan_table() noexcept { return kSheppLogan; }

bool contains(const EllipseSpec& e, double x, double y) noexcept {
  const double dx = x - e.center_x;
  const double dy = y - e.center_y;
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  const double u = (dx * c + dy * s) / e.axis_a;
  const double v = (-dx * s + dy * c) / e.axis_b;
  return u * u + v * v <= 1.0;
}

double pixel_coordinate(std::size_t index, std::size_t n) noexcept {
  const auto offset = static_cast<double>(static_cast<long long>(index) - static_cast<long long>(n / 2));
  return 2.0 * offset / static_cast<double>(n);
}

Image rasterize(std::size_t n, std::span<const EllipseSpec> ellipses) {
  for (const auto& e : ellipses) {
    if (!(e.axis_a > 0.0 && e.axis_b > 0.0)) throw ParameterError("rasterize: ellipse axes must be > 0");
  }
  Image img(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const double y = -pixel_coordinate(r, n);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = pixel_coordinate(c, n);
      double v = 0.0;
      for (const auto& e : ellipses) {
        if (contains(e, x, y)) v += e.intensity;
      }
      img(r, c) = v;
    }
  }
  return img;
}

Image clip_unit(Image image) {
  for (auto& v : image.values()) v = std::clamp(v, 0.0, 1.0);
  return image;
}

Image shepp_logan(std::size_t n) {
  check_size(n, "shepp_logan");
  return clip_unit(rasterize(n, kSheppLogan));
}

Image texture_phantom(std::size_t n, std::uint64_t seed) {
  check_size(n, "texture_phantom");
  CounterRng rng(seed, rng_stream::kPhantom);

  struct Blob {
    double x, y, radius, amplitude;
  };
  constexpr int kBlobs = 24;
  std::array<Blob, kBlobs> blobs{};
  for (auto& b : blobs) {
    b.x = rng.uniform(-0.8, 0.8);
    b.y = rng.uniform(-0.8, 0.8);
    b.radius = rng.uniform(0.05, 0.35);
    b.amplitude = rng.uniform(0.2, 1.0);
  }
  const double fx = rng.uniform(20.0, 40.0);
  const double fy = rng.uniform(20.0, 40.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  Image img(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const double y = -pixel_coordinate(r, n);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = pixel_coordinate(c, n);
      double v = 0.0;
      for (const auto& b : blobs) {
        const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        v += b.amplitude * std::exp(-d2 / (2.0 * b.radius * b.radius));
      }
      v += 0.15 * std::sin(fx * x + phase) * std::sin(fy * y);
      img(r, c) = v;
    }
  }

  const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
  const double min = *lo;
  const double span = *hi - *lo;
  for (auto& v : img.values()) v = span > 0.0 ? (v - min) / span : 0.0;
  return img;
}

}  // namespace kboot::phantom
