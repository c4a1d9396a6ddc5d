#include "kboot/motion.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <ostream>

#include "kboot/fft.hpp"
#include "kboot/rng.hpp"

namespace kboot::motion {

namespace {

void check_common(std::size_t n_pe, double k0) {
  if (n_pe < 2) throw DimensionError("motion trace: n_pe must be >= 2");
  if (!(k0 >= 0.0 && k0 <= std::numbers::pi)) {
    throw ParameterError(fmt::format("motion trace: k0 = {} outside [0, pi]", k0));
  }
}

void check_range(const char* name, double value, double lo, double hi) {
  if (!std::isfinite(value) || value < lo || value > hi) {
    throw ParameterError(fmt::format("periodic trace: {} = {} outside [{}, {}]", name, value, lo, hi));
  }
}

// Registers column i as corrupted when its phase is nonzero.
void set_line(MotionTrace& trace, std::size_t i, double displacement, double phase) {
  if (phase == 0.0) return;
  trace.delta[i] = displacement;
  trace.phi[i] = phase;
  trace.corrupted.push_back(i);
}

}  // namespace

MotionTrace zero_trace(std::size_t n_pe) {
  MotionTrace trace;
  trace.phi.assign(n_pe, 0.0);
  trace.delta.assign(n_pe, 0.0);
  return trace;
}

MotionTrace random_rigid_trace(std::size_t n_pe, double k0, double delta_max, std::uint64_t seed) {
  check_common(n_pe, k0);
  if (!(delta_max >= 0.0) || !std::isfinite(delta_max)) {
    throw ParameterError(fmt::format("rigid trace: delta_max = {} must be >= 0", delta_max));
  }

  MotionTrace trace = zero_trace(n_pe);
  trace.params = {.kind = TraceKind::rigid, .k0 = k0, .seed = seed, .delta_max = delta_max};

  CounterRng rng(seed, rng_stream::kMotion);
  for (std::size_t i = 0; i < n_pe; ++i) {
    const double ky = fft::frequency(i, n_pe);
    if (std::abs(ky) <= k0) continue;
    const double d = delta_max == 0.0 ? 0.0 : rng.uniform(-delta_max, delta_max);
    set_line(trace, i, d, ky * d);
  }
  return trace;
}

MotionTrace constant_trace(std::size_t n_pe, double k0, double shift) {
  check_common(n_pe, k0);
  if (!std::isfinite(shift)) throw ParameterError("constant trace: shift must be finite");
  MotionTrace trace = zero_trace(n_pe);
  trace.params = {.kind = TraceKind::rigid, .k0 = k0, .delta_max = std::abs(shift)};
  for (std::size_t i = 0; i < n_pe; ++i) {
    const double ky = fft::frequency(i, n_pe);
    if (std::abs(ky) > k0) set_line(trace, i, shift, ky * shift);
  }
  return trace;
}

MotionTrace periodic_trace(std::size_t n_pe, const PeriodicParams& params, std::uint64_t seed) {
  check_common(n_pe, params.k0);

  // One draw per constant in fixed order, whether or not it is used, so an
  // explicit value for one constant does not perturb the others.
  CounterRng rng(seed, rng_stream::kMotionParams);
  const double drawn_alpha = rng.uniform(kAlphaMin, kAlphaMax);
  const double drawn_beta = rng.uniform(kBetaMin, kBetaMax);
  const double drawn_delta = rng.uniform(kDeltaMin, kDeltaMax);

  // Explicit values are checked against the closed ranges.
  if (!params.allow_out_of_range) {
    if (params.alpha) check_range("alpha", *params.alpha, kAlphaMin, kAlphaMax);
    if (params.beta) check_range("beta", *params.beta, kBetaMin, kBetaMax);
    if (params.delta) check_range("delta", *params.delta, kDeltaMin, kDeltaMax);
  }
  const double alpha = params.alpha.value_or(drawn_alpha);
  const double beta = params.beta.value_or(drawn_beta);
  const double delta = params.delta.value_or(drawn_delta);
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(delta)) {
    throw ParameterError("periodic trace: parameters must be finite");
  }

  MotionTrace trace = zero_trace(n_pe);
  trace.params = {.kind = TraceKind::periodic,
                  .k0 = params.k0,
                  .seed = seed,
                  .alpha = alpha,
                  .beta = beta,
                  .delta = delta};

  for (std::size_t i = 0; i < n_pe; ++i) {
    const double ky = fft::frequency(i, n_pe);
    if (std::abs(ky) <= params.k0) continue;
    set_line(trace, i, delta, ky * delta * std::sin(alpha * ky + beta));
  }
  return trace;
}

KSpace apply_trace(const KSpace& kspace, const MotionTrace& trace) {
  if (trace.size() != kspace.n_pe()) {
    throw DimensionError(fmt::format("apply_trace: trace length {} != n_pe {}", trace.size(),
                                     kspace.n_pe()));
  }
  KSpace out = kspace;
  for (const std::size_t col : trace.corrupted) {
    const std::complex<double> rot = std::polar(1.0, -trace.phi[col]);
    for (std::size_t r = 0; r < out.n_fe(); ++r) out(r, col) *= rot;
  }
  return out;
}

MotionTrace negated(const MotionTrace& trace) {
  MotionTrace out = trace;
  for (auto& p : out.phi) p = -p;
  for (auto& d : out.delta) d = -d;
  return out;
}

void write_trace_csv(const MotionTrace& trace, std::ostream& out) {
  out << "index,k_y,delta,phi\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g}\n", i, fft::frequency(i, trace.size()),
               trace.delta[i], trace.phi[i]);
  }
}

}  // namespace kboot::motion
