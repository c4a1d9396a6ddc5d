#include "kboot/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace kboot::fft {

namespace {

// FFTW's planner is not thread-safe, but executing an existing plan on new
// arrays is. Plans are created once per (shape, sign) under a lock and kept
// for the life of the process. FFTW_UNALIGNED keeps the chosen codelets
// independent of buffer alignment, so results are reproducible bit for bit.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n0, std::size_t n1, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n0, n1, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* scratch = fftw_alloc_complex(n0 * n1);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), scratch,
                                      scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Centred transform: move the centre sample to index 0, transform, move
// index 0 back to the centre, scale.
KSpace centred_transform(const KSpace& in, int sign) {
  require_valid(in, sign == FFTW_FORWARD ? "fft::forward" : "fft::inverse");
  const std::size_t rows = in.n_fe();
  const std::size_t cols = in.n_pe();
  const std::size_t cr = rows / 2;
  const std::size_t cc = cols / 2;

  KSpace work(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t sr = (r + cr) % rows;
    for (std::size_t c = 0; c < cols; ++c) work(r, c) = in(sr, (c + cc) % cols);
  }

  auto* buf = reinterpret_cast<fftw_complex*>(work.data());
  fftw_execute_dft(plan_cache().get(rows, cols, sign), buf, buf);

  const double scale = 1.0 / std::sqrt(static_cast<double>(rows * cols));
  KSpace out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t dr = (r + cr) % rows;
    for (std::size_t c = 0; c < cols; ++c) out(dr, (c + cc) % cols) = work(r, c) * scale;
  }
  return out;
}

}  // namespace

double frequency(std::size_t index, std::size_t count) {
  // Numerator first so that e.g. count=320, index-centre=16 gives exactly pi/10.
  const double offset = static_cast<double>(static_cast<long long>(index) -
                                            static_cast<long long>(count / 2));
  return (2.0 * std::numbers::pi * offset) / static_cast<double>(count);
}

KSpace forward(const Image& image) {
  require_valid(image, "fft::forward");
  return centred_transform(to_complex(image), FFTW_FORWARD);
}

KSpace forward_complex(const ComplexImage& image) { return centred_transform(image, FFTW_FORWARD); }

ComplexImage inverse_complex(const KSpace& kspace) {
  return centred_transform(kspace, FFTW_BACKWARD);
}

Image inverse(const KSpace& kspace) { return magnitude(inverse_complex(kspace)); }

}  // namespace kboot::fft
