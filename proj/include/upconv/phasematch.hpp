#pragma once

#include <optional>
#include <vector>

#include "upconv/dispersion.hpp"

namespace upconv {

/// Both crystals of the PDC -> SFG cascade with the dispersion data the
/// phase-matching functions need, evaluated once at construction.
///
/// The signal carrier is always the degenerate frequency omega1 = omega0 / 2.
struct PhaseMatchContext {
  CrystalParams pdc;
  CrystalParams sfg;
  double omega0 = 0.0;
  double omega1 = 0.0;
  DispersionSample ordinary_pdc;
  DispersionSample extraordinary_pdc;
  DispersionSample ordinary_sfg;
  DispersionSample extraordinary_sfg;

  static PhaseMatchContext make(const CrystalParams& pdc, const CrystalParams& sfg, Wavelength pump);

  /// Same cascade with the SFG crystal rotated to theta_pdc + dtheta.
  PhaseMatchContext with_sfg_detuning(double dtheta) const;
  PhaseMatchContext with_sfg_length(double length) const;
  PhaseMatchContext with_pdc_length(double length) const;

  double k0_pdc() const { return extraordinary_pdc.k; }
  double k0_sfg() const { return extraordinary_sfg.k; }
  double detuning() const { return sfg.theta - pdc.theta; }
  Wavelength pump_wavelength() const { return Wavelength::from_angular_frequency(omega0); }
};

struct Bandwidths {
  double omega_d = 0.0;
  double q_d = 0.0;
  double omega_gvm = 0.0;
  double q_sw = 0.0;
};

/// SFG crystal lengths at which the propagation window becomes narrower than
/// the PDC band: q_SW = q_D at `walkoff`, Omega_GVM = Omega_D at `gvm`.
struct ThresholdLengths {
  double walkoff = 0.0;
  double gvm = 0.0;
};

/// Orientation angle giving 2 k1(omega0/2) = k0(theta, omega0), found by bisection
/// around `guess`.
double tune_collinear(const Material& material, Wavelength pump, double guess = degrees(23.0));

/// BBO cascade with l_c = 4 mm, l_c' = 1 mm, g = 9.3, pumped at 527.5 nm, both
/// crystals tuned for collinear degenerate phase matching.
PhaseMatchContext default_context();

/// k_1z(w) + k_1z(-w) - k_0^PDC in the PDC crystal. Throws EvanescentMode.
double delta_pdc(const PhaseMatchContext& ctx, const SpectralMode& w);

/// k_1z(w) + k_1z(w') - k_0z(w + w') in the SFG crystal.
double delta_sfg_pair(const PhaseMatchContext& ctx, const SpectralMode& w, const SpectralMode& wp);

/// Delta(w, -w): mismatch of the coherent (conjugate-pair) process.
double delta_sfg(const PhaseMatchContext& ctx, const SpectralMode& w);

/// Incoherent mismatch k_0^PDC - k_0z(w) + k_1' Omega with the exact k_0z.
double d_inc(const PhaseMatchContext& ctx, const SpectralMode& w);

/// Throws std::domain_error when the group-velocity mismatch or walk-off is not positive.
Bandwidths bandwidths(const PhaseMatchContext& ctx);

ThresholdLengths threshold_lengths(const PhaseMatchContext& ctx);

/// 2 sqrt(pi^2 + g^2) / (rho0 k0 l_c'): mistuning beyond which the coherent
/// component collapses.
double critical_angle(const PhaseMatchContext& ctx, double gain);

/// Frequency offset of the exact surface D_inc = 0 at transverse wavevector q,
/// for the detuning already stored in ctx. nullopt if no root within the window.
std::optional<double> sigma_omega(const PhaseMatchContext& ctx, const Eigen::Vector2d& q);

/// Same surface, linearized: q_x / q_SW = Omega / Omega_GVM - (k0^PDC - k0^SFG) l_c'.
double sigma_prime_omega(const PhaseMatchContext& ctx, double qx);

/// Walk-off-plane cut of the exact surface: q_x on D_inc(q_x, 0, Omega) = 0.
std::optional<double> sigma_qx(const PhaseMatchContext& ctx, double omega);

/// Central wavelength of the incoherent ridge at q = 0 for SFG detuning `dtheta`,
/// from a bisection on the exact D_inc. Throws std::domain_error when no root is in range.
Wavelength lambda_inc(const PhaseMatchContext& ctx, double dtheta);

/// Small-angle closed form lambda0 - n0 rho0 lambda0 / (c (k0' - k1')) dtheta.
Wavelength lambda_inc_linear(const PhaseMatchContext& ctx, double dtheta);

/// d lambda_inc / d theta of the closed form (meters per radian).
double lambda_inc_linear_slope(const PhaseMatchContext& ctx);

struct LambdaIncRow {
  double dtheta = 0.0;
  double lambda_exact = 0.0;
  double lambda_linear = 0.0;
};

/// Exact and linear lambda_inc over an angle list, sorted by angle.
std::vector<LambdaIncRow> lambda_inc_sweep(const PhaseMatchContext& ctx, std::vector<double> angles);

} // namespace upconv
