#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "kboot/grid.hpp"
#include "kboot/sampling.hpp"

namespace kboot::recon {

enum class ReconKind { zero_filled, ista };

std::string_view to_string(ReconKind kind) noexcept;

/// Maps a subsampled spectrum and its mask to a full-size magnitude image.
/// Implementations are deterministic and keep the input dimensions.
class Reconstructor {
 public:
  virtual ~Reconstructor() = default;
  virtual Image reconstruct(const KSpace& subsampled, const sampling::SamplingMask& mask) const = 0;
  virtual ReconKind kind() const noexcept = 0;
};

/// Magnitude of the unitary inverse DFT of the zero-filled spectrum.
Image zero_filled(const KSpace& subsampled, const sampling::SamplingMask& mask);

/// Componentwise soft threshold sign(v) * max(|v| - t, 0); for complex v the
/// sign is v/|v|.
double soft_threshold(double v, double t) noexcept;
std::complex<double> soft_threshold(std::complex<double> v, double t) noexcept;

struct IstaParams {
  /// Penalty weight. Unset means 0.01 * max|W x_zf| of the zero-filled start.
  std::optional<double> lambda;
  int iters = 50;
  int levels = 3;
  /// Zero-pad sides that are not multiples of 2^levels (symmetrically), crop after.
  bool pad = true;
  bool record_objective = false;
  /// Called with the iterate after every shrinkage step (before data consistency).
  std::function<void(int iteration, const ComplexImage& iterate)> on_iterate;
};

struct IstaResult {
  ComplexImage estimate;           ///< complex image after hard data consistency
  std::vector<double> objective;   ///< at the start and after each iteration, if recorded
  double lambda = 0.0;
};

/// ISTA for min_x 1/2 ||M F x - y||^2 + lambda ||W x||_1 with unitary F and
/// orthonormal Haar W, unit step, started from the zero-filled image. The
/// sampled lines of the final spectrum are overwritten by y.
IstaResult ista_solve(const KSpace& subsampled, const sampling::SamplingMask& mask,
                      const IstaParams& params);

Image ista_reconstruct(const KSpace& subsampled, const sampling::SamplingMask& mask,
                       const IstaParams& params = {});

/// Value of the ISTA objective at x, with the same padding rule as the solver.
double ista_objective(const ComplexImage& x, const KSpace& measured,
                      const sampling::SamplingMask& mask, double lambda, int levels, bool pad);

class ZeroFilledReconstructor final : public Reconstructor {
 public:
  Image reconstruct(const KSpace& subsampled, const sampling::SamplingMask& mask) const override {
    return zero_filled(subsampled, mask);
  }
  ReconKind kind() const noexcept override { return ReconKind::zero_filled; }
};

class IstaReconstructor final : public Reconstructor {
 public:
  explicit IstaReconstructor(IstaParams params = {}) : params_(std::move(params)) {}
  Image reconstruct(const KSpace& subsampled, const sampling::SamplingMask& mask) const override {
    return ista_reconstruct(subsampled, mask, params_);
  }
  ReconKind kind() const noexcept override { return ReconKind::ista; }
  const IstaParams& params() const noexcept { return params_; }

 private:
  IstaParams params_;
};

std::shared_ptr<const Reconstructor> make_reconstructor(ReconKind kind, const IstaParams& params = {});

}  // namespace kboot::recon
