#include "upconv/fft.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace upconv {

namespace {

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

} // namespace

Fft3::Fft3(int n0, int n1, int n2) : n_{n0, n1, n2}, scratch_(n0, n1, n2) {
  std::lock_guard lock(planner_mutex());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch_.data());
  forward_ = fftw_plan_dft_3d(n0, n1, n2, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_3d(n0, n1, n2, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw std::runtime_error("FFTW plan creation failed");
}

Fft3::~Fft3() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void Fft3::operator()(ComplexGrid& grid, FftDirection direction) const {
  if (grid.dim(0) != n_[0] || grid.dim(1) != n_[1] || grid.dim(2) != n_[2]) {
    throw std::invalid_argument("grid shape does not match the FFT plan");
  }
  auto plan = static_cast<fftw_plan>(direction == FftDirection::forward ? forward_ : backward_);
  auto* buf = reinterpret_cast<fftw_complex*>(grid.data());
  // new-array execute: same shape, in-place; alignment may differ from the planning buffer
  fftw_execute_dft(plan, buf, buf);
  const double scale = 1.0 / std::sqrt(static_cast<double>(grid.size()));
  for (auto& v : grid.storage()) v *= scale;
}

} // namespace upconv
