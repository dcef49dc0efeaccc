#pragma once

#include <complex>

#include "upconv/grid.hpp"

namespace upconv {

enum class FftDirection { forward, backward };

/// In-place unitary 3D transform on a ComplexGrid of fixed shape.
///
/// forward:  X_k = N^{-1/2} sum_j x_j e^{-2 pi i jk/n}
/// backward: x_j = N^{-1/2} sum_k X_k e^{+2 pi i jk/n}
///
/// Plans are built with FFTW_ESTIMATE and one thread, so results do not depend
/// on timing or on the caller's thread count.
class Fft3 {
public:
  Fft3(int n0, int n1, int n2);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  void operator()(ComplexGrid& grid, FftDirection direction) const;

private:
  int n_[3];
  void* forward_ = nullptr;
  void* backward_ = nullptr;
  ComplexGrid scratch_;
};

} // namespace upconv
