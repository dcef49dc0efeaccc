#pragma once

#include <optional>
#include <string>
#include <vector>

#include "upconv/grid.hpp"
#include "upconv/pwpa.hpp"
#include "upconv/simulator.hpp"

namespace upconv {

/// Frequency axes (q, Omega) or the instrument's (alpha in degrees, lambda in nm).
enum class AxisMode { frequency, experimental };

std::string to_string(AxisMode mode);
AxisMode axis_mode_from_string(const std::string& s);

struct SpectrometerView {
  /// xw keeps q_y near 0 and yields (q_x, Omega); yw keeps q_x near 0 and yields (q_y, Omega).
  Plane plane = Plane::xw;
  /// Stripe width in cells, centred on the zero row.
  int slit = 1;
  /// Slices always carry frequency axes; `experimental` only affects exports.
  AxisMode axes = AxisMode::frequency;

  void validate() const;
};

/// Stripe average of a centred spectrum. Throws std::invalid_argument when the stripe leaves the grid.
Spectrum2D slice_spectrum(const Spectrum3D& spectrum, const SpectrometerView& view);

/// lambda = 2 pi c / (carrier + Omega).
double wavelength_of(double omega, double carrier);
double omega_of(double lambda, double carrier);
/// Small-angle emission angle q lambda / (2 pi), in degrees.
double alpha_degrees(double q, double omega, double carrier);
double q_of_alpha(double alpha_deg, double omega, double carrier);

struct ExperimentalPoint {
  double alpha_deg = 0.0;
  double lambda_nm = 0.0;
  double value = 0.0;
};

/// Every cell of a (q, Omega) slice in instrument coordinates, row by row.
std::vector<ExperimentalPoint> experimental_points(const Spectrum2D& slice, double carrier);

template <typename S>
struct CoherentSplit {
  double n_coh = 0.0;
  double n_inc = 0.0;
  double coherent_peak = 0.0;
  /// Largest value outside the mask.
  double background_peak = 0.0;
  /// Outside-mask spectrum (mask cells zeroed), optionally clipped at truncate * coherent_peak.
  S residual;
};

/// Sums inside / outside an ellipsoidal mask of `radius` cells around the origin cell.
/// Throws ConfigError when the mask covers more than 10% of the grid.
CoherentSplit<Spectrum3D> split_coherent_incoherent(const Spectrum3D& spectrum, int radius = 3,
                                                    std::optional<double> truncate = std::nullopt);
CoherentSplit<Spectrum2D> split_coherent_incoherent(const Spectrum2D& spectrum, int radius = 3,
                                                    std::optional<double> truncate = std::nullopt);

/// Totals and peaks of an ensemble split (|<c>|^2 and the variance).
struct EnsembleSplit {
  double n_coh = 0.0;
  double n_inc = 0.0;
  double coherent_peak = 0.0;
  double incoherent_peak = 0.0;
};

EnsembleSplit ensemble_split(const Spectrum3D& coherent, const Spectrum3D& incoherent);

struct CentroidOptions {
  /// Cells below floor * row maximum carry no weight.
  double floor = 0.1;
  bool argmax = false;
};

struct RidgeCentroids {
  std::vector<double> q;
  std::vector<double> omega;
  /// Rows without positive weight.
  std::vector<int> skipped;
  /// Centroid of the q = 0 row, when that row has weight.
  std::optional<double> omega_at_zero;
};

/// Omega centroid of every q row; negative cells count as zero.
RidgeCentroids ridge_centroid(const Spectrum2D& spectrum, const CentroidOptions& options = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares dOmega/dq over centroids with |q| <= q_max.
LineFit ridge_slope(const RidgeCentroids& centroids, double q_max);

/// Intensity-weighted cov(q, Omega) / var(q), i.e. dOmega/dq of the cloud; negative cells count as zero.
double covariance_tilt(const Spectrum2D& spectrum);

enum class Engine { analytic, pwpa, stochastic };

std::string to_string(Engine engine);
Engine engine_from_string(const std::string& s);

struct SweepRow {
  double dtheta = 0.0;
  std::optional<double> lambda_inc;
  std::optional<double> n_coh;
  std::optional<double> n_inc;
  /// dOmega/dq of the incoherent ridge.
  std::optional<double> slope;
  /// Empty when the row is complete; otherwise why a field is missing.
  std::string flag;
};

struct SweepResult {
  Engine provenance = Engine::analytic;
  std::vector<SweepRow> rows;
  /// Frequency cell of the engine, for grid-cell tolerances (0 for the analytic engine).
  double domega = 0.0;
};

struct SweepOptions {
  Engine engine = Engine::analytic;
  CentroidOptions centroid;
  int mask_radius = 3;
  /// Half width, in cells, of the PWPA column window around the analytic ridge.
  int pwpa_half_window = 64;
  int threads = 1;
};

/// Per-angle lambda_inc, photon numbers and ridge slope for the crystals, pump and grid of `config`.
/// Rows come back sorted by angle; failures are recorded in the row flag.
SweepResult angle_sweep(const RunConfig& config, std::vector<double> dthetas, const SweepOptions& options);

} // namespace upconv
