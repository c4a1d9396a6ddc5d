#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "kboot/grid.hpp"

namespace kboot::phantom {

/// Ellipse in normalised coordinates: x to the right, y up, both in [-1, 1].
struct EllipseSpec {
  double center_x = 0.0;
  double center_y = 0.0;
  double axis_a = 1.0;  ///< semi-axis along the rotated x direction
  double axis_b = 1.0;
  double angle = 0.0;   ///< radians, counter-clockwise
  double intensity = 0.0;
};

/// The ten-ellipse Shepp-Logan table with the higher-contrast intensities of
/// Toft (1996), the "modified" variant used by MATLAB's phantom().
std::span<const EllipseSpec> shepp_logan_table() noexcept;

/// Whether the point (x, y) lies inside or on the ellipse.
bool contains(const EllipseSpec& e, double x, double y) noexcept;

/// Normalised coordinate of pixel centre `index` on an n-pixel axis; pixel
/// floor(n/2) sits at 0. Row coordinates are negated so that y points up.
double pixel_coordinate(std::size_t index, std::size_t n) noexcept;

/// Sum of intensities of every ellipse containing each pixel centre (no clipping).
Image rasterize(std::size_t n, std::span<const EllipseSpec> ellipses);

/// Clamp every pixel to [0, 1].
Image clip_unit(Image image);

/// Shepp-Logan phantom on an n x n grid, clipped to [0, 1]. Requires n >= 16.
Image shepp_logan(std::size_t n);

/// Liver-like test image: seeded Gaussian blobs plus a fine sinusoidal
/// texture, rescaled to [0, 1]. Requires n >= 16.
Image texture_phantom(std::size_t n, std::uint64_t seed);

}  // namespace kboot::phantom
