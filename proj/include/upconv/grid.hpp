#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace upconv {

enum class AxisKind { qx, qy, omega, alpha, lambda };
enum class Normalization { photons_per_mode, arbitrary };

std::string to_string(AxisKind kind);
std::string to_string(Normalization n);
AxisKind axis_kind_from_string(const std::string& s);
Normalization normalization_from_string(const std::string& s);

/// Uniform axis: value(i) = offset + i * spacing.
struct Axis {
  AxisKind kind = AxisKind::qx;
  double offset = 0.0;
  double spacing = 1.0;
  int size = 0;

  double value(int i) const { return offset + i * spacing; }

  /// Axis of `n` cells with spacing `d` whose index n/2 sits at zero.
  static Axis centered(AxisKind kind, int n, double d) { return {kind, -(n / 2) * d, d, n}; }
  int center() const { return size / 2; }
};

/// Real density on a 2D grid. Rows follow `first` (a transverse axis), columns `second` (frequency).
struct Spectrum2D {
  Axis first;
  Axis second;
  Eigen::ArrayXXd values;
  Normalization normalization = Normalization::arbitrary;

  Spectrum2D() = default;
  Spectrum2D(Axis a, Axis b, Normalization n = Normalization::arbitrary)
      : first(a), second(b), values(Eigen::ArrayXXd::Zero(a.size, b.size)), normalization(n) {}

  /// Throws std::invalid_argument when values are negative or axes are not strictly monotone.
  void validate() const;
};

/// Dense 3D array, row-major with the last index fastest (FFTW layout).
template <typename Scalar>
class Grid3 {
public:
  Grid3() = default;
  Grid3(int n0, int n1, int n2, Scalar fill = Scalar{})
      : n_{n0, n1, n2}, data_(static_cast<std::size_t>(n0) * n1 * n2, fill) {}

  int dim(int i) const { return n_[i]; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_[1] + j) * n_[2] + k;
  }
  Scalar& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  const Scalar& operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  Scalar& operator[](std::size_t n) { return data_[n]; }
  const Scalar& operator[](std::size_t n) const { return data_[n]; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  std::vector<Scalar>& storage() { return data_; }
  const std::vector<Scalar>& storage() const { return data_; }

  bool operator==(const Grid3&) const = default;

private:
  int n_[3] = {0, 0, 0};
  std::vector<Scalar> data_;
};

using ComplexGrid = Grid3<std::complex<double>>;
using RealGrid = Grid3<double>;

/// Real density over (q_x, q_y, Omega) in centered order: cell i of axis a sits at axes[a].value(i).
struct Spectrum3D {
  Axis axes[3];
  RealGrid values;
  Normalization normalization = Normalization::arbitrary;
};

/// Signed frequency index of FFT bin i on an axis of n points: 0, 1, ..., n/2-1, -n/2, ..., -1.
constexpr int fft_index(int i, int n) { return i < n / 2 ? i : i - n; }

/// FFT bin holding signed index m.
constexpr int fft_bin(int m, int n) { return m >= 0 ? m : m + n; }

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace upconv
