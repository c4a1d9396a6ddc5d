#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <vector>

#include "kboot/grid.hpp"

namespace kboot::motion {

enum class TraceKind { none, rigid, periodic };

/// Default phase-error onset: lines with |k_y| <= pi/10 are left untouched.
inline constexpr double kDefaultK0 = std::numbers::pi / 10.0;

/// Bounds used when drawing random motion parameters (open intervals).
inline constexpr double kAlphaMin = 0.1;
inline constexpr double kAlphaMax = 5.0;
inline constexpr double kBetaMin = 0.0;
inline constexpr double kBetaMax = std::numbers::pi / 4.0;
inline constexpr double kDeltaMin = 0.0;
inline constexpr double kDeltaMax = 37.0;

struct TraceParams {
  TraceKind kind = TraceKind::none;
  double k0 = kDefaultK0;
  std::uint64_t seed = 0;
  double delta_max = 0.0;  // rigid
  double alpha = 0.0;      // periodic, as used (after random draws)
  double beta = 0.0;
  double delta = 0.0;
};

/// Per-line phase errors phi (radians) and the set of corrupted columns.
/// phi[i] != 0 exactly when i is listed in `corrupted` (ascending).
struct MotionTrace {
  std::vector<double> phi;
  std::vector<double> delta;  // displacement in pixels behind phi, 0 off-trace
  std::vector<std::size_t> corrupted;
  TraceParams params;

  std::size_t size() const noexcept { return phi.size(); }
};

/// Identity trace of the given length.
MotionTrace zero_trace(std::size_t n_pe);

/// Rigid motion: phi = k_y * d_k for |k_y| > k0 with d_k ~ U(-delta_max, delta_max)
/// drawn independently per line, in ascending column order.
MotionTrace random_rigid_trace(std::size_t n_pe, double k0, double delta_max, std::uint64_t seed);

/// Rigid translation by `shift` pixels on every line with |k_y| > k0.
/// With k0 = 0 and an integer shift the image moves circularly by `shift`
/// pixels along phase encoding.
MotionTrace constant_trace(std::size_t n_pe, double k0, double shift);

/// Periodic (respiratory) motion parameters; an empty optional means "draw
/// uniformly from the default range with the trace seed".
struct PeriodicParams {
  double k0 = kDefaultK0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> delta;
  /// Skip range checks on explicitly given alpha/beta/delta.
  bool allow_out_of_range = false;
};

/// Periodic motion: phi = k_y * delta * sin(alpha * k_y + beta) for |k_y| > k0.
MotionTrace periodic_trace(std::size_t n_pe, const PeriodicParams& params, std::uint64_t seed);

/// Multiply column i by exp(-j * phi[i]). Columns outside the corrupted set are
/// copied unchanged.
KSpace apply_trace(const KSpace& kspace, const MotionTrace& trace);

/// Trace with every phase negated; apply_trace with it undoes the original.
MotionTrace negated(const MotionTrace& trace);

/// CSV dump: header `index,k_y,delta,phi`, one row per phase-encode line.
void write_trace_csv(const MotionTrace& trace, std::ostream& out);

}  // namespace kboot::motion
