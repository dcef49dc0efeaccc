#pragma once

#include <complex>

#include "upconv/grid.hpp"
#include "upconv/phasematch.hpp"

namespace upconv {

using cplx = std::complex<double>;

/// Bogoliubov gains of the PDC crystal for one mode: b(w) = U a(w) + V a^dagger(-w).
struct GainPair {
  cplx u;
  cplx v;
};

/// U, V with the phase convention U = e^{i(k1z l - d)} [cosh G + i d sinh G / G],
/// V = e^{i(k1z l - d)} g sinh G / G, d = Delta_PDC l / 2, G = sqrt(g^2 - d^2).
/// G is a complex square root, so modes with |d| > g oscillate instead of growing.
/// Throws EvanescentMode for non-propagating modes.
GainPair gain_functions(const PhaseMatchContext& ctx, const SpectralMode& w, double g);

/// |V|^2 written through the mismatch alone: g^2 |sinh G / G|^2.
double pdc_gain_spectrum(double delta_l, double g);

/// Photon number per mode, |V(w)|^2.
double pdc_spectrum(const PhaseMatchContext& ctx, const SpectralMode& w, double g);

/// U(w) V(-w) evaluated from its closed form.
cplx biphoton_amplitude(const PhaseMatchContext& ctx, const SpectralMode& w, double g);

/// sigma l e^{i Delta l / 2} sinc(Delta l / 2) for the SFG crystal in ctx.
cplx sfg_kernel(const PhaseMatchContext& ctx, const SpectralMode& w, const SpectralMode& wp);
cplx sfg_kernel_from_mismatch(double delta, double sigma, double length);

/// Uniform (|q|, Omega) quadrature for the coherent amplitude. The integrand
/// depends on q only through |q|, so the transverse plane is integrated radially.
struct CoherentQuadrature {
  double dq = 0.0;
  int n_q = 0;
  double domega = 0.0;
  int n_omega = 0;
};

/// Spacing a fifth of the narrowest of (q_D, q_SW) and (Omega_D, Omega_GVM) divided by
/// `refine`, extended to cover the PDC band selected by `box_half_width`.
CoherentQuadrature default_coherent_quadrature(const PhaseMatchContext& ctx, double g, double box_half_width,
                                               double refine = 1.0);

/// A = sum over w' of UV(w') Phi(w', -w') dw' / (2 pi)^{3/2}, restricted to |Omega| <= box.
/// Throws ResolutionError when a spacing exceeds a quarter of the narrowest scale.
cplx coherent_amplitude(const PhaseMatchContext& ctx, double g, const CoherentQuadrature& quad,
                        double box_half_width, int threads = 1);

enum class Plane { xw, yw };
std::string to_string(Plane p);
Plane plane_from_string(const std::string& s);

/// Output and integration grids for plane spectra. Both share the spacings
/// (dq, domega); the integration grid covers (n_q_int x stripe x n_omega_int)
/// cells, the stripe running across the plane (q_y for xw, q_x for yw).
struct PlaneGrid {
  Plane plane = Plane::xw;
  int n_q = 128;
  int n_omega = 128;
  double dq = 0.0;
  double domega = 0.0;
  int n_q_int = 256;
  int n_omega_int = 512;
  int stripe = 3;
  double box_half_width = 5e14;

  Axis q_axis() const;
  Axis omega_axis() const;
};

/// Spacings q_SW / 4.5 and Omega_GVM / 4.5 for the SFG crystal in ctx.
PlaneGrid default_plane_grid(const PhaseMatchContext& ctx, Plane plane);

/// Throws ResolutionError if the spacings exceed a quarter of q_SW or Omega_GVM.
void check_resolution(const PhaseMatchContext& ctx, const PlaneGrid& grid);

/// Largest |Omega| for which both signal frequencies omega1 +- Omega lie in the
/// Sellmeier window, capped by the box filter.
double effective_box(const PhaseMatchContext& ctx, double box_half_width);

/// |V|^2 on the output plane, zero outside the box filter.
Spectrum2D pdc_spectrum(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid);

/// 2 sum_{w'} dw'/(2 pi)^3 S(w - w') S(w') |Phi(w - w', w')|^2 on the output plane.
Spectrum2D incoherent_spectrum_full(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid,
                                    int threads = 1);

/// Same quantity along a single output column q = q_index * dq (all n_omega cells).
Eigen::ArrayXd incoherent_column_full(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid,
                                      int q_index, int threads = 1);

/// Column cells Omega = (first + n) * domega for n < count; the window may extend past the output plane.
Eigen::ArrayXd incoherent_column_full(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid, int q_index,
                                      int first, int count, int threads = 1);

/// Self-convolution of the box-filtered PDC spectrum, on the output plane.
Spectrum2D pdc_self_convolution(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid);

/// (sigma l')^2 sinc^2(D_inc l' / 2) on the output plane.
Spectrum2D propagation_factor(const PhaseMatchContext& ctx, const PlaneGrid& grid);

/// 2 W V, the factorized counterpart of incoherent_spectrum_full.
Spectrum2D incoherent_spectrum_factorized(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid);

/// Linear autoconvolution (f * f)(c) = measure * sum_{c'} f(c - c') f(c'), where
/// cell j of each axis sits at coordinate j - n/2. Evaluated by zero-padded FFT
/// and returned on the input's index set.
RealGrid self_convolution(const RealGrid& f, double measure);
Spectrum2D self_convolution(const Spectrum2D& s, double measure);

} // namespace upconv
