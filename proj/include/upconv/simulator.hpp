#pragma once

#include <cstdint>
#include <vector>

#include "upconv/grid.hpp"
#include "upconv/phasematch.hpp"

namespace upconv {

/// Discretization of (x, y, t) and of the conjugate (q_x, q_y, Omega).
///
/// Spectral arrays are stored in FFT bin order. Bin (i, j, k) holds
/// q_x = fft_index(i) dq_x, q_y = fft_index(j) dq_y and Omega = -fft_index(k) dOmega:
/// fields are synthesized as sum A(w) e^{i(q.x - Omega t)}.
struct GridSpec {
  int nx = 64;
  int ny = 64;
  int nt = 256;
  double dx = 100e-6;
  double dy = 100e-6;
  double dt = 43e-15;

  double dqx() const { return two_pi / (nx * dx); }
  double dqy() const { return two_pi / (ny * dy); }
  double domega() const { return two_pi / (nt * dt); }

  double qx(int i) const { return fft_index(i, nx) * dqx(); }
  double qy(int j) const { return fft_index(j, ny) * dqy(); }
  double omega(int k) const { return -fft_index(k, nt) * domega(); }
  double x(int i) const { return fft_index(i, nx) * dx; }
  double y(int j) const { return fft_index(j, ny) * dy; }
  double t(int k) const { return fft_index(k, nt) * dt; }

  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny * nt; }

  /// Throws ConfigError unless sizes are powers of two and spacings positive.
  void validate() const;
};

struct PumpPulse {
  double waist = 500e-6;
  double duration = 1e-12;
  /// Pulse energy; sets the pump photon number and hence the depletion scale, not the gain.
  double energy = 350e-6;
  Wavelength carrier = Wavelength::nanometers(527.5);

  void validate() const;
};

/// Complex amplitudes over the grid with |A|^2 in photons per mode (symmetric ordering).
struct SpectralField {
  GridSpec grid;
  Polarization polarization = Polarization::ordinary;
  /// Carrier angular frequency the offsets Omega refer to.
  double carrier = 0.0;
  double z = 0.0;
  ComplexGrid values;

  double total() const;
};

struct RunConfig {
  GridSpec grid;
  CrystalParams pdc;
  CrystalParams sfg;
  /// Extra rotation of the SFG crystal, theta_sfg = theta_pdc + dtheta.
  double dtheta = 0.0;
  PumpPulse pump;
  double filter_min = 750e-9;
  double filter_max = 1300e-9;
  int steps_pdc = 200;
  int steps_sfg = 200;
  std::uint64_t seed = 1;
  int realizations = 1;
  /// Seed the generated harmonic with vacuum noise too (off: the SFG input is empty).
  bool seed_sfg_vacuum = false;
  int threads = 1;

  PhaseMatchContext context() const;
  /// Throws ConfigError / ResolutionError for invalid or under-resolved settings.
  void validate() const;
};

/// Desk-scale defaults: BBO, l_c = l_c' = 4 mm, g = 9.3, both crystals tuned,
/// 64 x 64 x 256 grid with dx = 100 um and dt = 43 fs.
RunConfig default_run_config();

/// Requires dq < q_SW / 4 and dOmega < Omega_GVM / 4 for the SFG crystal, and a
/// window of at least 6 pump waists and durations.
void check_resolution(const RunConfig& config);

/// Counter-based stream for realization r of a run seeded with `seed`.
std::uint64_t realization_seed(std::uint64_t seed, std::uint64_t realization);

/// Wigner vacuum: independent circular Gaussian amplitudes with <|c|^2> = 1/2.
SpectralField seed_vacuum(const GridSpec& grid, std::uint64_t seed);

/// Gaussian pump envelope of peak direct-space amplitude `peak`, returned in spectral form.
SpectralField pump_field(const GridSpec& grid, const PumpPulse& pump, double peak);

/// Peak direct-space amplitude carrying the pulse energy as photons on this grid.
double pump_peak_amplitude(const GridSpec& grid, const PumpPulse& pump);

/// Coupling for which a pump of direct-space amplitude `peak` gives gain g over l_c.
double coupling_for_gain(double gain, double peak, double length);

/// Fields at one crystal's exit: the ordinary field at omega1 and the extraordinary one at omega0.
struct CrystalOutput {
  SpectralField ordinary;
  SpectralField extraordinary;
};

/// Symmetric split-step through one crystal of the coupled equations
///   d a1/dz = 2 chi a0 conj(a1),   d a0/dz = -chi a1^2
/// (direct space, grid units) with exact dispersion in a frame moving at the
/// ordinary group velocity. `crystal` selects length and orientation; carriers
/// come from ctx. Modes outside the Sellmeier window or evanescent are zeroed.
/// Throws NumericalError when the fields stop being finite.
CrystalOutput propagate_crystal(const PhaseMatchContext& ctx, const CrystalParams& crystal, SpectralField ordinary,
                                SpectralField extraordinary, double chi, int steps, int threads = 1);

/// PDC stage: signal (ordinary) seeded field with a co-propagating pump.
CrystalOutput propagate_pdc(const PhaseMatchContext& ctx, SpectralField signal, SpectralField pump, double chi,
                            int steps, int threads = 1);

/// Identity imaging with a hard spectral mask on the signal wavelength.
SpectralField image_4f_and_filter(SpectralField field, double lambda_min, double lambda_max);

/// SFG stage in the crystal ctx.sfg; `harmonic` is the input at omega0 (zero or vacuum).
CrystalOutput propagate_sfg(const PhaseMatchContext& ctx, SpectralField signal, SpectralField harmonic, double chi,
                            int steps, int threads = 1);

/// |A|^2 per mode in centered order; subtract_vacuum removes the 1/2 symmetric-ordering term.
Spectrum3D far_field(const SpectralField& field, bool subtract_vacuum);

/// Centered-order spectral density of a field (no vacuum correction), with axes.
Spectrum3D to_centered(const GridSpec& grid, const RealGrid& fft_order, Normalization n);

struct ExperimentResult {
  /// Realization-averaged SFG far field for each requested detuning.
  std::vector<double> dthetas;
  std::vector<Spectrum3D> sfg;
  /// Ensemble split of `sfg` into |<c>|^2 and <|c|^2> - |<c>|^2 (unbiased); empty for one realization.
  std::vector<Spectrum3D> sfg_coherent;
  std::vector<Spectrum3D> sfg_incoherent;
  /// Realization-averaged PDC signal spectrum (vacuum-corrected).
  Spectrum3D pdc;
  double seconds = 0.0;
};

/// seed -> PDC -> image/filter -> SFG -> far field, averaged over config.realizations.
/// The PDC stage of each realization is reused for every detuning in `dthetas`.
ExperimentResult run_experiment(const RunConfig& config, const std::vector<double>& dthetas);

/// Single detuning config.dtheta.
ExperimentResult run_experiment(const RunConfig& config);

} // namespace upconv
