#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "upconv/units.hpp"

namespace upconv {

/// One resonance term B / (lambda^2 - C) of a Sellmeier expansion, lambda in um.
struct SellmeierTerm {
  double strength = 0.0;
  double resonance = 0.0;
};

/// n^2(lambda) = A + sum_i B_i / (lambda^2 - C_i) - D lambda^2, lambda in micrometers.
///
/// Evaluation is only defined inside [lambda_min_um, lambda_max_um]; the
/// checked entry points throw DomainError outside it instead of extrapolating.
struct SellmeierSet {
  double constant = 1.0;
  std::vector<SellmeierTerm> poles;
  double infrared = 0.0;
  double lambda_min_um = 0.4;
  double lambda_max_um = 1.4;

  /// n^2 and its first two derivatives with respect to lambda (per um).
  struct Derivatives {
    double value = 0.0;
    double first = 0.0;
    double second = 0.0;
  };

  bool contains(Wavelength lambda) const;
  double n_squared(double lambda_um) const;
  Derivatives n_squared_derivatives(double lambda_um) const;
};

/// Principal indices of a uniaxial crystal.
struct Material {
  std::string name;
  SellmeierSet ordinary;
  SellmeierSet extraordinary;
};

/// Beta-barium borate, the published coefficient set
/// n_o^2 = 2.7359 + 0.01878/(l^2 - 0.01822) - 0.01354 l^2,
/// n_e^2 = 2.3753 + 0.01224/(l^2 - 0.01667) - 0.01516 l^2.
Material bbo();

/// Material and geometry of one chi(2) crystal. Angles in radians, lengths in meters.
struct CrystalParams {
  Material material = bbo();
  double length = 4e-3;
  /// Angle between the optic axis and the pump propagation axis z.
  double theta = degrees(23.0);
  /// SFG probability-amplitude scale entering Phi = sigma * l * ...
  double sigma = 1.0;
  /// Dimensionless parametric gain (PDC crystal only).
  double gain = 0.0;

  /// Throws DomainError if any invariant (l > 0, 0 < theta < pi/2, sigma >= 0, g >= 0) fails.
  void validate() const;
};

enum class Polarization { ordinary, extraordinary };

/// k, dk/dOmega, d2k/dOmega2 at the carrier, plus the walk-off angle.
struct DispersionSample {
  double k = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double walkoff = 0.0;
};

/// A Fourier mode (q, Omega) relative to a carrier.
struct SpectralMode {
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  double omega = 0.0;

  SpectralMode operator-() const { return {-q, -omega}; }
  friend SpectralMode operator+(const SpectralMode& a, const SpectralMode& b) {
    return {a.q + b.q, a.omega + b.omega};
  }
  friend SpectralMode operator-(const SpectralMode& a, const SpectralMode& b) {
    return {a.q - b.q, a.omega - b.omega};
  }
};

inline SpectralMode mode(double qx, double qy, double omega) { return {Eigen::Vector2d(qx, qy), omega}; }

double index_ordinary(const Material& material, Wavelength lambda);

/// Index ellipse: 1/n^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2.
double index_extraordinary(const Material& material, double theta, Wavelength lambda);

/// Wavenumber (omega/c) n at absolute angular frequency omega, or nullopt when
/// the wavelength falls outside the Sellmeier window. Non-throwing; used by grid loops.
std::optional<double> try_wavenumber(const Material& material, Polarization pol, double theta,
                                     double omega);

/// Longitudinal wavevector of the ordinary mode (q, Omega) about `carrier`.
/// Throws DomainError outside the Sellmeier window; nullopt for evanescent modes.
std::optional<double> kz_ordinary(const Material& material, double carrier,
                                  const Eigen::Vector2d& q, double omega);

/// Exact extraordinary longitudinal wavevector. The optic axis lies in the x-z plane at
/// (-sin theta, 0, cos theta), so the transverse offset q_x tilts the wavevector away from
/// the axis and k_z ~ k - rho q_x with rho > 0.
std::optional<double> kz_extraordinary(const Material& material, double carrier, double theta,
                                       const Eigen::Vector2d& q, double omega);

/// Closed-form root of the index-ellipsoid quadratic for k_z. Inputs are the
/// total wavenumber K = omega/c and the inverse squared principal indices.
std::optional<double> ellipsoid_kz(double wavenumber, double inv_no2, double inv_ne2, double theta,
                                   double qx, double qy);

/// k, k', k'' at Omega = 0 and the walk-off angle. Derivatives are analytic in the
/// Sellmeier form; walk-off is rho = n^2(theta)/2 (1/n_e^2 - 1/n_o^2) sin(2 theta),
/// and exactly zero for the ordinary wave.
DispersionSample dispersion_sample(const Material& material, Polarization pol, double theta,
                                   double carrier);

} // namespace upconv
