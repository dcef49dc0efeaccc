#pragma once

#include <numbers>

namespace upconv {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double degrees(double deg) { return deg * pi / 180.0; }
constexpr double to_degrees(double rad) { return rad * 180.0 / pi; }

/// Vacuum wavelength. Stored in meters; the named constructors are the only
/// place where micrometers or nanometers enter the library.
class Wavelength {
public:
  constexpr Wavelength() = default;

  static constexpr Wavelength meters(double m) { return Wavelength(m); }
  static constexpr Wavelength micrometers(double um) { return Wavelength(um * 1e-6); }
  static constexpr Wavelength nanometers(double nm) { return Wavelength(nm * 1e-9); }
  static constexpr Wavelength from_angular_frequency(double omega) {
    return Wavelength(two_pi * speed_of_light / omega);
  }

  constexpr double in_meters() const { return meters_; }
  constexpr double in_micrometers() const { return meters_ * 1e6; }
  constexpr double in_nanometers() const { return meters_ * 1e9; }
  constexpr double angular_frequency() const { return two_pi * speed_of_light / meters_; }

  friend constexpr auto operator<=>(Wavelength, Wavelength) = default;

private:
  explicit constexpr Wavelength(double m) : meters_(m) {}
  double meters_ = 0.0;
};

} // namespace upconv
