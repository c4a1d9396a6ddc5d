#include "kboot/recon.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "kboot/fft.hpp"
#include "kboot/haar.hpp"

namespace kboot::recon {

namespace {

using sampling::Direction;
using sampling::SamplingMask;

// Sparsifying transform W = Haar o pad and its inverse crop o Haar^-1.
class WaveletOp {
 public:
  WaveletOp(std::size_t n_fe, std::size_t n_pe, int levels, bool pad)
      : n_fe_(n_fe), n_pe_(n_pe), levels_(levels) {
    if (levels < 0) throw ParameterError("ista: levels must be >= 0");
    const std::size_t block = std::size_t{1} << levels;
    if (!haar::divisible(n_fe, n_pe, levels)) {
      if (!pad) {
        throw ShapeError(fmt::format("ista: {}x{} image not divisible by 2^{} and padding disabled",
                                     n_fe, n_pe, levels));
      }
    }
    padded_fe_ = (n_fe + block - 1) / block * block;
    padded_pe_ = (n_pe + block - 1) / block * block;
    off_fe_ = (padded_fe_ - n_fe) / 2;
    off_pe_ = (padded_pe_ - n_pe) / 2;
  }

  ComplexImage analyse(const ComplexImage& x) const {
    ComplexImage c(padded_fe_, padded_pe_);
    for (std::size_t r = 0; r < n_fe_; ++r) {
      for (std::size_t k = 0; k < n_pe_; ++k) c(r + off_fe_, k + off_pe_) = x(r, k);
    }
    haar::forward(c, levels_);
    return c;
  }

  ComplexImage synthesise(ComplexImage c) const {
    haar::inverse(c, levels_);
    ComplexImage x(n_fe_, n_pe_);
    for (std::size_t r = 0; r < n_fe_; ++r) {
      for (std::size_t k = 0; k < n_pe_; ++k) x(r, k) = c(r + off_fe_, k + off_pe_);
    }
    return x;
  }

 private:
  std::size_t n_fe_, n_pe_;
  int levels_;
  std::size_t padded_fe_ = 0, padded_pe_ = 0, off_fe_ = 0, off_pe_ = 0;
};

bool kept(const SamplingMask& mask, std::size_t r, std::size_t c) {
  return mask.keep[mask.direction == Direction::phase_encode ? c : r];
}

double l1_norm(const ComplexImage& c) {
  double s = 0.0;
  for (const auto& v : c.values()) s += std::abs(v);
  return s;
}

double objective_value(const ComplexImage& x, const KSpace& y, const SamplingMask& mask,
                       double lambda, const WaveletOp& wavelet) {
  const KSpace fx = fft::forward_complex(x);
  double fidelity = 0.0;
  for (std::size_t r = 0; r < fx.n_fe(); ++r) {
    for (std::size_t c = 0; c < fx.n_pe(); ++c) {
      if (kept(mask, r, c)) fidelity += std::norm(fx(r, c) - y(r, c));
    }
  }
  return 0.5 * fidelity + lambda * l1_norm(wavelet.analyse(x));
}

}  // namespace

std::string_view to_string(ReconKind kind) noexcept {
  return kind == ReconKind::ista ? "ista" : "zf";
}

Image zero_filled(const KSpace& subsampled, const SamplingMask& mask) {
  return fft::inverse(sampling::apply_mask(subsampled, mask));
}

double soft_threshold(double v, double t) noexcept {
  if (t == 0.0) return v;
  const double m = std::abs(v) - t;
  return m > 0.0 ? std::copysign(m, v) : 0.0;
}

std::complex<double> soft_threshold(std::complex<double> v, double t) noexcept {
  if (t == 0.0) return v;
  const double a = std::abs(v);
  if (a <= t) return 0.0;
  return v * ((a - t) / a);
}

double ista_objective(const ComplexImage& x, const KSpace& measured, const SamplingMask& mask,
                      double lambda, int levels, bool pad) {
  require_same_shape(x, measured, "ista_objective");
  const KSpace y = sampling::apply_mask(measured, mask);
  return objective_value(x, y, mask, lambda, WaveletOp(x.n_fe(), x.n_pe(), levels, pad));
}

IstaResult ista_solve(const KSpace& subsampled, const SamplingMask& mask, const IstaParams& params) {
  require_valid(subsampled, "ista");
  if (params.iters < 1) throw ParameterError("ista: iters must be >= 1");
  if (params.lambda && !(*params.lambda >= 0.0)) throw ParameterError("ista: lambda must be >= 0");

  const WaveletOp wavelet(subsampled.n_fe(), subsampled.n_pe(), params.levels, params.pad);
  const KSpace y = sampling::apply_mask(subsampled, mask);

  IstaResult result;
  ComplexImage x = fft::inverse_complex(y);

  if (params.lambda) {
    result.lambda = *params.lambda;
  } else {
    double peak = 0.0;
    for (const auto& v : wavelet.analyse(x).values()) peak = std::max(peak, std::abs(v));
    result.lambda = 0.01 * peak;
  }
  const double lambda = result.lambda;

  if (params.record_objective) result.objective.push_back(objective_value(x, y, mask, lambda, wavelet));

  for (int it = 0; it < params.iters; ++it) {
    // Gradient step on the data term: F^H M^H (M F x - y), unit step.
    KSpace residual = fft::forward_complex(x);
    for (std::size_t r = 0; r < residual.n_fe(); ++r) {
      for (std::size_t c = 0; c < residual.n_pe(); ++c) {
        residual(r, c) = kept(mask, r, c) ? residual(r, c) - y(r, c) : 0.0;
      }
    }
    const ComplexImage grad = fft::inverse_complex(residual);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= grad[i];

    ComplexImage coeffs = wavelet.analyse(x);
    for (auto& v : coeffs.values()) v = soft_threshold(v, lambda);
    x = wavelet.synthesise(std::move(coeffs));

    if (params.record_objective) result.objective.push_back(objective_value(x, y, mask, lambda, wavelet));
    if (params.on_iterate) params.on_iterate(it + 1, x);
  }

  // Hard data consistency on the sampled lines.
  KSpace spectrum = fft::forward_complex(x);
  for (std::size_t r = 0; r < spectrum.n_fe(); ++r) {
    for (std::size_t c = 0; c < spectrum.n_pe(); ++c) {
      if (kept(mask, r, c)) spectrum(r, c) = y(r, c);
    }
  }
  result.estimate = fft::inverse_complex(spectrum);
  return result;
}

Image ista_reconstruct(const KSpace& subsampled, const SamplingMask& mask, const IstaParams& params) {
  return magnitude(ista_solve(subsampled, mask, params).estimate);
}

std::shared_ptr<const Reconstructor> make_reconstructor(ReconKind kind, const IstaParams& params) {
  if (kind == ReconKind::ista) return std::make_shared<IstaReconstructor>(params);
  return std::make_shared<ZeroFilledReconstructor>();
}

}  // namespace kboot::recon
