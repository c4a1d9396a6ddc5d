#include "kboot/haar.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace kboot::haar {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

void check_shape(std::size_t n_fe, std::size_t n_pe, int levels) {
  if (levels < 0) throw ParameterError("haar: levels must be >= 0");
  if (!divisible(n_fe, n_pe, levels)) {
    throw ShapeError(fmt::format("haar: {}x{} grid is not divisible by 2^{}", n_fe, n_pe, levels));
  }
}

// One analysis step on `len` strided samples.
template <typename T>
void analyse(T* base, std::size_t stride, std::size_t len, std::vector<T>& scratch) {
  const std::size_t half = len / 2;
  scratch.resize(len);
  for (std::size_t k = 0; k < half; ++k) {
    const T a = base[(2 * k) * stride];
    const T b = base[(2 * k + 1) * stride];
    scratch[k] = (a + b) * kInvSqrt2;
    scratch[half + k] = (a - b) * kInvSqrt2;
  }
  for (std::size_t k = 0; k < len; ++k) base[k * stride] = scratch[k];
}

template <typename T>
void synthesise(T* base, std::size_t stride, std::size_t len, std::vector<T>& scratch) {
  const std::size_t half = len / 2;
  scratch.resize(len);
  for (std::size_t k = 0; k < half; ++k) {
    const T a = base[k * stride];
    const T d = base[(half + k) * stride];
    scratch[2 * k] = (a + d) * kInvSqrt2;
    scratch[2 * k + 1] = (a - d) * kInvSqrt2;
  }
  for (std::size_t k = 0; k < len; ++k) base[k * stride] = scratch[k];
}

}  // namespace

bool divisible(std::size_t n_fe, std::size_t n_pe, int levels) {
  const std::size_t block = std::size_t{1} << levels;
  return n_fe % block == 0 && n_pe % block == 0;
}

template <typename T>
void forward(Grid<T>& grid, int levels) {
  check_shape(grid.n_fe(), grid.n_pe(), levels);
  std::vector<T> scratch;
  std::size_t rows = grid.n_fe();
  std::size_t cols = grid.n_pe();
  for (int level = 0; level < levels; ++level) {
    for (std::size_t r = 0; r < rows; ++r) analyse(&grid(r, 0), 1, cols, scratch);
    for (std::size_t c = 0; c < cols; ++c) analyse(&grid(0, c), grid.n_pe(), rows, scratch);
    rows /= 2;
    cols /= 2;
  }
}

template <typename T>
void inverse(Grid<T>& grid, int levels) {
  check_shape(grid.n_fe(), grid.n_pe(), levels);
  std::vector<T> scratch;
  for (int level = levels - 1; level >= 0; --level) {
    const std::size_t rows = grid.n_fe() >> level;
    const std::size_t cols = grid.n_pe() >> level;
    for (std::size_t c = 0; c < cols; ++c) synthesise(&grid(0, c), grid.n_pe(), rows, scratch);
    for (std::size_t r = 0; r < rows; ++r) synthesise(&grid(r, 0), 1, cols, scratch);
  }
}

template void forward<double>(Grid<double>&, int);
template void forward<std::complex<double>>(Grid<std::complex<double>>&, int);
template void inverse<double>(Grid<double>&, int);
template void inverse<std::complex<double>>(Grid<std::complex<double>>&, int);

}  // namespace kboot::haar
