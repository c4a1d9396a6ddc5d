#pragma once

#include <complex>
#include <cstddef>

#include "kboot/grid.hpp"

namespace kboot::haar {

/// True when both sides of the grid are divisible by 2^levels.
bool divisible(std::size_t n_fe, std::size_t n_pe, int levels);

/// Multi-level orthonormal 2D Haar analysis, in place. Each level splits the
/// current low-pass block along rows then columns into [approx | detail]
/// halves. Throws ShapeError when a side is not divisible by 2^levels.
template <typename T>
void forward(Grid<T>& grid, int levels);

/// Exact inverse of forward.
template <typename T>
void inverse(Grid<T>& grid, int levels);

extern template void forward<double>(Grid<double>&, int);
extern template void forward<std::complex<double>>(Grid<std::complex<double>>&, int);
extern template void inverse<double>(Grid<double>&, int);
extern template void inverse<std::complex<double>>(Grid<std::complex<double>>&, int);

}  // namespace kboot::haar
