#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "kboot/error.hpp"

namespace kboot {

/// Row-major 2D grid. Axis 0 (rows) is frequency encoding (read-out),
/// axis 1 (columns) is phase encoding. Every mask and motion trace indexes
/// axis 1 unless a frequency-encode mask is requested explicitly.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t n_fe, std::size_t n_pe, T fill = T{})
      : n_fe_(n_fe), n_pe_(n_pe), data_(n_fe * n_pe, fill) {}

  std::size_t n_fe() const noexcept { return n_fe_; }
  std::size_t n_pe() const noexcept { return n_pe_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t fe, std::size_t pe) { return data_[fe * n_pe_ + pe]; }
  const T& operator()(std::size_t fe, std::size_t pe) const { return data_[fe * n_pe_ + pe]; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool same_shape(const Grid& other) const noexcept {
    return n_fe_ == other.n_fe_ && n_pe_ == other.n_pe_;
  }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return n_fe_ == other.n_fe() && n_pe_ == other.n_pe();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_fe_ = 0;
  std::size_t n_pe_ = 0;
  std::vector<T> data_;
};

/// Magnitude image, dimensionless intensities.
using Image = Grid<double>;

/// DC-centred k-space. Also used for complex-valued images (ISTA iterates).
using KSpace = Grid<std::complex<double>>;
using ComplexImage = Grid<std::complex<double>>;

/// Throws DimensionError unless both sides are >= 2 and every sample is finite.
template <typename T>
void require_valid(const Grid<T>& grid, const char* what) {
  if (grid.n_fe() < 2 || grid.n_pe() < 2) {
    throw DimensionError(std::string(what) + ": both dimensions must be >= 2");
  }
  for (const auto& v : grid.values()) {
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(v)) throw DimensionError(std::string(what) + ": non-finite sample");
    } else {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw DimensionError(std::string(what) + ": non-finite sample");
      }
    }
  }
}

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.n_fe() != b.n_fe() || a.n_pe() != b.n_pe()) {
    throw DimensionError(std::string(what) + ": grid dimensions differ");
  }
}

inline Image magnitude(const ComplexImage& z) {
  Image out(z.n_fe(), z.n_pe());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::abs(z[i]);
  return out;
}

inline ComplexImage to_complex(const Image& x) {
  ComplexImage out(x.n_fe(), x.n_pe());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
  return out;
}

}  // namespace kboot
