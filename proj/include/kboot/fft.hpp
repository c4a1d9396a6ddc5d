#pragma once

#include <cstddef>

#include "kboot/grid.hpp"

namespace kboot::fft {

/// Normalised phase-encode frequency of column `index` on an axis of
/// `count` samples: k = 2*pi*(index - floor(count/2)) / count, in [-pi, pi).
double frequency(std::size_t index, std::size_t count);

/// Centred unitary 2D DFT. The spatial origin and the DC sample both sit at
/// (floor(n_fe/2), floor(n_pe/2)); each direction is scaled by 1/sqrt(n_fe*n_pe).
KSpace forward(const Image& image);
KSpace forward_complex(const ComplexImage& image);

/// Unitary inverse of forward_complex.
ComplexImage inverse_complex(const KSpace& kspace);

/// Pixelwise magnitude of inverse_complex.
Image inverse(const KSpace& kspace);

}  // namespace kboot::fft
