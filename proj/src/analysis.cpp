#include "upconv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "upconv/errors.hpp"

namespace upconv {

namespace {

bool in_mask(int da, int db, int dc, int radius) { return da * da + db * db + dc * dc <= radius * radius; }

void check_mask(std::size_t covered, std::size_t total, int radius) {
  if (covered * 10 > total) {
    throw ConfigError(fmt::format("coherent mask of radius {} covers {} of {} cells (> 10%); use a smaller radius",
                                  radius, covered, total));
  }
}

double clamp_positive(double v) { return v > 0.0 ? v : 0.0; }

} // namespace

std::string to_string(AxisMode mode) { return mode == AxisMode::frequency ? "frequency" : "experimental"; }

AxisMode axis_mode_from_string(const std::string& s) {
  if (s == "frequency") return AxisMode::frequency;
  if (s == "experimental") return AxisMode::experimental;
  throw std::invalid_argument("axis mode must be 'frequency' or 'experimental', got '" + s + "'");
}

void SpectrometerView::validate() const {
  if (slit < 1) throw std::invalid_argument(fmt::format("slit width must be at least one cell, got {}", slit));
}

Spectrum2D slice_spectrum(const Spectrum3D& spectrum, const SpectrometerView& view) {
  view.validate();
  // xw averages over q_y (axis 1) and keeps q_x; yw the other way round
  const int keep = view.plane == Plane::xw ? 0 : 1;
  const int across = 1 - keep;
  const Axis& ax = spectrum.axes[across];
  const int lo = ax.center() - (view.slit - 1) / 2;
  const int hi = lo + view.slit;
  if (lo < 0 || hi > ax.size) {
    throw std::invalid_argument(
        fmt::format("slit of {} cells does not fit in the {}-cell {} axis", view.slit, ax.size, to_string(ax.kind)));
  }
  Spectrum2D out(spectrum.axes[keep], spectrum.axes[2], spectrum.normalization);
  for (int a = 0; a < spectrum.axes[keep].size; ++a) {
    for (int c = 0; c < spectrum.axes[2].size; ++c) {
      double sum = 0.0;
      for (int s = lo; s < hi; ++s) sum += keep == 0 ? spectrum.values(a, s, c) : spectrum.values(s, a, c);
      out.values(a, c) = sum / view.slit;
    }
  }
  return out;
}

double wavelength_of(double omega, double carrier) { return two_pi * speed_of_light / (carrier + omega); }

double omega_of(double lambda, double carrier) { return two_pi * speed_of_light / lambda - carrier; }

double alpha_degrees(double q, double omega, double carrier) {
  return to_degrees(q * wavelength_of(omega, carrier) / two_pi);
}

double q_of_alpha(double alpha_deg, double omega, double carrier) {
  return two_pi * degrees(alpha_deg) / wavelength_of(omega, carrier);
}

std::vector<ExperimentalPoint> experimental_points(const Spectrum2D& slice, double carrier) {
  std::vector<ExperimentalPoint> out;
  out.reserve(static_cast<std::size_t>(slice.first.size) * slice.second.size);
  for (int a = 0; a < slice.first.size; ++a) {
    for (int c = 0; c < slice.second.size; ++c) {
      const double om = slice.second.value(c);
      out.push_back({alpha_degrees(slice.first.value(a), om, carrier), wavelength_of(om, carrier) * 1e9,
                     slice.values(a, c)});
    }
  }
  return out;
}

CoherentSplit<Spectrum3D> split_coherent_incoherent(const Spectrum3D& spectrum, int radius,
                                                    std::optional<double> truncate) {
  if (radius < 0) throw ConfigError("mask radius must be non-negative");
  const int c0 = spectrum.axes[0].center(), c1 = spectrum.axes[1].center(), c2 = spectrum.axes[2].center();
  const int n0 = spectrum.values.dim(0), n1 = spectrum.values.dim(1), n2 = spectrum.values.dim(2);
  std::size_t covered = 0;
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b)
      for (int c = 0; c < n2; ++c) covered += in_mask(a - c0, b - c1, c - c2, radius);
  check_mask(covered, spectrum.values.size(), radius);

  CoherentSplit<Spectrum3D> out;
  out.residual = spectrum;
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b)
      for (int c = 0; c < n2; ++c) {
        const double v = spectrum.values(a, b, c);
        if (in_mask(a - c0, b - c1, c - c2, radius)) {
          out.n_coh += v;
          out.coherent_peak = std::max(out.coherent_peak, v);
          out.residual.values(a, b, c) = 0.0;
        } else {
          out.n_inc += v;
          out.background_peak = std::max(out.background_peak, v);
        }
      }
  if (truncate) {
    const double ceiling = *truncate * out.coherent_peak;
    for (auto& v : out.residual.values.storage()) v = std::min(v, ceiling);
  }
  return out;
}

CoherentSplit<Spectrum2D> split_coherent_incoherent(const Spectrum2D& spectrum, int radius,
                                                    std::optional<double> truncate) {
  if (radius < 0) throw ConfigError("mask radius must be non-negative");
  const int c0 = spectrum.first.center(), c1 = spectrum.second.center();
  const auto rows = spectrum.values.rows(), cols = spectrum.values.cols();
  std::size_t covered = 0;
  for (int a = 0; a < rows; ++a)
    for (int c = 0; c < cols; ++c) covered += in_mask(a - c0, 0, c - c1, radius);
  check_mask(covered, static_cast<std::size_t>(spectrum.values.size()), radius);

  CoherentSplit<Spectrum2D> out;
  out.residual = spectrum;
  for (int a = 0; a < rows; ++a)
    for (int c = 0; c < cols; ++c) {
      const double v = spectrum.values(a, c);
      if (in_mask(a - c0, 0, c - c1, radius)) {
        out.n_coh += v;
        out.coherent_peak = std::max(out.coherent_peak, v);
        out.residual.values(a, c) = 0.0;
      } else {
        out.n_inc += v;
        out.background_peak = std::max(out.background_peak, v);
      }
    }
  if (truncate) out.residual.values = out.residual.values.min(*truncate * out.coherent_peak);
  return out;
}

EnsembleSplit ensemble_split(const Spectrum3D& coherent, const Spectrum3D& incoherent) {
  if (coherent.values.size() != incoherent.values.size()) {
    throw std::invalid_argument("coherent and incoherent spectra differ in shape");
  }
  EnsembleSplit out;
  out.coherent_peak = coherent.values[0];
  out.incoherent_peak = incoherent.values[0];
  for (std::size_t n = 0; n < coherent.values.size(); ++n) {
    out.n_coh += coherent.values[n];
    out.n_inc += incoherent.values[n];
    out.coherent_peak = std::max(out.coherent_peak, coherent.values[n]);
    out.incoherent_peak = std::max(out.incoherent_peak, incoherent.values[n]);
  }
  return out;
}

RidgeCentroids ridge_centroid(const Spectrum2D& spectrum, const CentroidOptions& options) {
  RidgeCentroids out;
  const int zero_row = spectrum.first.center();
  for (int a = 0; a < spectrum.first.size; ++a) {
    double mx = 0.0;
    int best = -1;
    for (int c = 0; c < spectrum.second.size; ++c) {
      const double v = spectrum.values(a, c);
      if (v > mx) {
        mx = v;
        best = c;
      }
    }
    if (best < 0) {
      out.skipped.push_back(a);
      continue;
    }
    double om;
    if (options.argmax) {
      om = spectrum.second.value(best);
    } else {
      double w = 0.0, wo = 0.0;
      for (int c = 0; c < spectrum.second.size; ++c) {
        const double v = clamp_positive(spectrum.values(a, c));
        if (v < options.floor * mx) continue;
        w += v;
        wo += v * spectrum.second.value(c);
      }
      om = wo / w;
    }
    out.q.push_back(spectrum.first.value(a));
    out.omega.push_back(om);
    if (a == zero_row) out.omega_at_zero = om;
  }
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("a line fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("a line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = static_cast<int>(x.size());
  return f;
}

LineFit ridge_slope(const RidgeCentroids& centroids, double q_max) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < centroids.q.size(); ++i) {
    if (std::abs(centroids.q[i]) > q_max) continue;
    x.push_back(centroids.q[i]);
    y.push_back(centroids.omega[i]);
  }
  return fit_line(x, y);
}

double covariance_tilt(const Spectrum2D& spectrum) {
  double w = 0.0, mq = 0.0, mo = 0.0;
  for (int a = 0; a < spectrum.first.size; ++a)
    for (int c = 0; c < spectrum.second.size; ++c) {
      const double v = clamp_positive(spectrum.values(a, c));
      w += v;
      mq += v * spectrum.first.value(a);
      mo += v * spectrum.second.value(c);
    }
  if (w == 0.0) throw std::invalid_argument("covariance tilt of an empty spectrum");
  mq /= w;
  mo /= w;
  double cqo = 0.0, cqq = 0.0;
  for (int a = 0; a < spectrum.first.size; ++a)
    for (int c = 0; c < spectrum.second.size; ++c) {
      const double v = clamp_positive(spectrum.values(a, c));
      const double dq = spectrum.first.value(a) - mq;
      cqo += v * dq * (spectrum.second.value(c) - mo);
      cqq += v * dq * dq;
    }
  return cqo / cqq;
}

std::string to_string(Engine engine) {
  switch (engine) {
  case Engine::analytic: return "analytic";
  case Engine::pwpa: return "pwpa";
  case Engine::stochastic: return "stochastic";
  }
  return "?";
}

Engine engine_from_string(const std::string& s) {
  if (s == "analytic") return Engine::analytic;
  if (s == "pwpa") return Engine::pwpa;
  if (s == "stochastic") return Engine::stochastic;
  throw std::invalid_argument("engine must be analytic, pwpa or stochastic, got '" + s + "'");
}

namespace {

double analytic_slope(const PhaseMatchContext& ctx) {
  return ctx.extraordinary_sfg.walkoff / (ctx.extraordinary_sfg.k1 - ctx.ordinary_sfg.k1);
}

void sweep_analytic(const RunConfig& config, SweepResult& result) {
  const auto base = config.context();
  for (auto& row : result.rows) {
    try {
      row.lambda_inc = lambda_inc(base, row.dtheta).in_meters();
      row.slope = analytic_slope(base.with_sfg_detuning(row.dtheta));
      row.flag = "no photon numbers from the analytic engine";
    } catch (const std::exception& e) {
      row.flag = e.what();
    }
  }
}

void sweep_pwpa(const RunConfig& config, const SweepOptions& options, SweepResult& result) {
  const auto base = config.context();
  const double g = config.pdc.gain;
  for (auto& row : result.rows) {
    try {
      const auto ctx = base.with_sfg_detuning(row.dtheta);
      const auto grid = default_plane_grid(ctx, Plane::xw);
      result.domega = grid.domega;
      // window centred on the analytic ridge so that large detunings stay in view
      const double guess = omega_of(lambda_inc(base, row.dtheta).in_meters(), ctx.omega0);
      const int centre = static_cast<int>(std::lround(guess / grid.domega));
      const int first = centre - options.pwpa_half_window;
      const int count = 2 * options.pwpa_half_window + 1;
      const auto column = incoherent_column_full(ctx, g, grid, 0, first, count, options.threads);
      Spectrum2D line(Axis::centered(AxisKind::qx, 1, grid.dq),
                      Axis{AxisKind::omega, first * grid.domega, grid.domega, count});
      line.values.row(0) = column.transpose();
      const auto c = ridge_centroid(line, options.centroid);
      if (c.omega_at_zero) {
        row.lambda_inc = wavelength_of(*c.omega_at_zero, ctx.omega0);
        const int cell = static_cast<int>(std::lround(*c.omega_at_zero / grid.domega)) - first;
        if (cell < 3 || cell > count - 4) row.flag = "ridge centroid at the edge of the column window";
      } else {
        row.flag = "empty q = 0 column";
      }
      const double box = effective_box(ctx, grid.box_half_width);
      const auto quad = default_coherent_quadrature(ctx, g, box);
      row.n_coh = std::norm(coherent_amplitude(ctx, g, quad, box, options.threads));
    } catch (const std::exception& e) {
      row.flag = e.what();
    }
  }
}

void sweep_stochastic(const RunConfig& config, const SweepOptions& options, SweepResult& result) {
  std::vector<double> angles;
  for (const auto& row : result.rows) angles.push_back(row.dtheta);
  result.domega = config.grid.domega();
  ExperimentResult run;
  try {
    auto c = config;
    c.threads = options.threads;
    run = run_experiment(c, angles);
  } catch (const std::exception& e) {
    for (auto& row : result.rows) row.flag = e.what();
    return;
  }
  const double q_max = 2.0 * bandwidths(config.context()).q_sw;
  const double carrier = config.context().omega0;
  for (std::size_t a = 0; a < result.rows.size(); ++a) {
    auto& row = result.rows[a];
    try {
      Spectrum3D incoherent;
      if (!run.sfg_incoherent.empty()) {
        const auto split = ensemble_split(run.sfg_coherent[a], run.sfg_incoherent[a]);
        row.n_coh = split.n_coh;
        row.n_inc = split.n_inc;
        incoherent = run.sfg_incoherent[a];
      } else {
        auto split = split_coherent_incoherent(run.sfg[a], options.mask_radius);
        row.n_coh = split.n_coh;
        row.n_inc = split.n_inc;
        incoherent = std::move(split.residual);
      }
      const auto slice = slice_spectrum(incoherent, {Plane::xw, 1, AxisMode::frequency});
      const auto c = ridge_centroid(slice, options.centroid);
      if (c.omega_at_zero) {
        row.lambda_inc = wavelength_of(*c.omega_at_zero, carrier);
        const double edge = slice.second.value(slice.second.size - 1) - 3.0 * slice.second.spacing;
        if (std::abs(*c.omega_at_zero) > edge) row.flag = "ridge centroid at the edge of the grid";
      } else {
        row.flag = "empty q = 0 row";
      }
      row.slope = ridge_slope(c, q_max).slope;
    } catch (const std::exception& e) {
      row.flag = e.what();
    }
  }
}

} // namespace

SweepResult angle_sweep(const RunConfig& config, std::vector<double> dthetas, const SweepOptions& options) {
  std::sort(dthetas.begin(), dthetas.end());
  SweepResult result;
  result.provenance = options.engine;
  for (double d : dthetas) result.rows.push_back({d, {}, {}, {}, {}, {}});
  switch (options.engine) {
  case Engine::analytic: sweep_analytic(config, result); break;
  case Engine::pwpa: sweep_pwpa(config, options, result); break;
  case Engine::stochastic: sweep_stochastic(config, options, result); break;
  }
  return result;
}

} // namespace upconv
