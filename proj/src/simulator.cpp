#include "upconv/simulator.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "upconv/errors.hpp"
#include "upconv/fft.hpp"
#include "upconv/parallel.hpp"

namespace upconv {

namespace {

using cplx = std::complex<double>;

int wrap(int m, int n) { return ((m % n) + n) % n; }

/// e^{i L dz/2} per mode for one carrier in one crystal; zero for masked modes.
std::vector<cplx> half_step_phases(const GridSpec& grid, const Material& material, Polarization pol, double theta,
                                   double carrier, double ref_k, double ref_k1, double dz) {
  std::vector<cplx> out(grid.cells(), 0.0);
  for (int k = 0; k < grid.nt; ++k) {
    const double om = grid.omega(k);
    const auto lambda = Wavelength::from_angular_frequency(carrier + om);
    if (!material.ordinary.contains(lambda) || !material.extraordinary.contains(lambda)) continue;
    for (int i = 0; i < grid.nx; ++i) {
      for (int j = 0; j < grid.ny; ++j) {
        const Eigen::Vector2d q(grid.qx(i), grid.qy(j));
        const auto kz = pol == Polarization::ordinary ? kz_ordinary(material, carrier, q, om)
                                                      : kz_extraordinary(material, carrier, theta, q, om);
        if (!kz) continue;
        const double l = *kz - ref_k - ref_k1 * om;
        out[(static_cast<std::size_t>(i) * grid.ny + j) * grid.nt + k] = std::polar(1.0, 0.5 * l * dz);
      }
    }
  }
  return out;
}

void multiply(ComplexGrid& f, const std::vector<cplx>& phases) {
  auto* d = f.data();
  for (std::size_t n = 0; n < phases.size(); ++n) d[n] *= phases[n];
}

bool finite(const ComplexGrid& f) {
  double s = 0.0;
  for (const auto& v : f.storage()) s += std::norm(v);
  return std::isfinite(s);
}

SpectralField empty_field(const GridSpec& grid, Polarization pol, double carrier) {
  SpectralField f;
  f.grid = grid;
  f.polarization = pol;
  f.carrier = carrier;
  f.values = ComplexGrid(grid.nx, grid.ny, grid.nt);
  return f;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

void GridSpec::validate() const {
  for (int n : {nx, ny, nt}) {
    if (!is_power_of_two(n)) throw ConfigError(fmt::format("grid sizes must be powers of two, got {}", n));
  }
  if (!(dx > 0.0 && dy > 0.0 && dt > 0.0)) throw ConfigError("grid spacings must be positive");
}

void PumpPulse::validate() const {
  if (!(waist > 0.0 && duration > 0.0)) throw ConfigError("pump waist and duration must be positive");
  if (!(energy > 0.0)) throw ConfigError("pump energy must be positive");
}

double SpectralField::total() const {
  double s = 0.0;
  for (const auto& v : values.storage()) s += std::norm(v);
  return s;
}

PhaseMatchContext RunConfig::context() const {
  auto sfg_crystal = sfg;
  sfg_crystal.theta = pdc.theta + dtheta;
  return PhaseMatchContext::make(pdc, sfg_crystal, pump.carrier);
}

void RunConfig::validate() const {
  grid.validate();
  pump.validate();
  pdc.validate();
  sfg.validate();
  if (steps_pdc < 100 || steps_sfg < 100) throw ConfigError("at least 100 z-steps per crystal are required");
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  const auto& o = pdc.material.ordinary;
  if (!(filter_min < filter_max) || filter_min < o.lambda_min_um * 1e-6 || filter_max > o.lambda_max_um * 1e-6) {
    throw ConfigError(fmt::format("filter window [{}, {}] nm must lie inside the Sellmeier window [{}, {}] nm",
                                  filter_min * 1e9, filter_max * 1e9, o.lambda_min_um * 1e3, o.lambda_max_um * 1e3));
  }
  check_resolution(*this);
}

RunConfig default_run_config() {
  RunConfig c;
  const auto ctx = default_context();
  c.pdc = ctx.pdc;
  c.sfg = ctx.sfg;
  c.sfg.length = 4e-3;
  return c;
}

void check_resolution(const RunConfig& config) {
  const auto b = bandwidths(config.context());
  const auto& g = config.grid;
  if (std::max(g.dqx(), g.dqy()) >= 0.25 * b.q_sw) {
    throw ResolutionError(fmt::format("dq = {:.4g} 1/m must be below q_SW/4 = {:.4g} 1/m (q_SW = {:.4g}); "
                                      "enlarge nx*dx or ny*dy",
                                      std::max(g.dqx(), g.dqy()), 0.25 * b.q_sw, b.q_sw));
  }
  if (g.domega() >= 0.25 * b.omega_gvm) {
    throw ResolutionError(fmt::format("dOmega = {:.4g} rad/s must be below Omega_GVM/4 = {:.4g} rad/s "
                                      "(Omega_GVM = {:.4g}); enlarge nt*dt",
                                      g.domega(), 0.25 * b.omega_gvm, b.omega_gvm));
  }
  const auto& p = config.pump;
  if (g.nx * g.dx < 6 * p.waist || g.ny * g.dy < 6 * p.waist || g.nt * g.dt < 6 * p.duration) {
    throw ResolutionError("grid window must span at least 6 pump waists and 6 pump durations");
  }
}

std::uint64_t realization_seed(std::uint64_t seed, std::uint64_t realization) {
  return splitmix64(splitmix64(seed) ^ splitmix64(realization + 0x632be59bd9b4e019ULL));
}

SpectralField seed_vacuum(const GridSpec& grid, std::uint64_t seed) {
  auto f = empty_field(grid, Polarization::ordinary, 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  for (auto& v : f.values.storage()) {
    const double re = n(rng);
    v = cplx(re, n(rng));
  }
  return f;
}

double pump_peak_amplitude(const GridSpec& grid, const PumpPulse& pump) {
  double mass = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      for (int k = 0; k < grid.nt; ++k) {
        const double r2 = grid.x(i) * grid.x(i) + grid.y(j) * grid.y(j);
        const double t = grid.t(k);
        mass += std::exp(-2.0 * r2 / (pump.waist * pump.waist) - 2.0 * t * t / (pump.duration * pump.duration));
      }
  const double photons = pump.energy / (hbar * pump.carrier.angular_frequency());
  return std::sqrt(photons / mass);
}

SpectralField pump_field(const GridSpec& grid, const PumpPulse& pump, double peak) {
  auto f = empty_field(grid, Polarization::extraordinary, pump.carrier.angular_frequency());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      for (int k = 0; k < grid.nt; ++k) {
        const double r2 = grid.x(i) * grid.x(i) + grid.y(j) * grid.y(j);
        const double t = grid.t(k);
        f.values(i, j, k) = peak * std::exp(-r2 / (pump.waist * pump.waist) - t * t / (pump.duration * pump.duration));
      }
  Fft3 fft(grid.nx, grid.ny, grid.nt);
  fft(f.values, FftDirection::forward);
  return f;
}

double coupling_for_gain(double gain, double peak, double length) { return gain / (2.0 * peak * length); }

CrystalOutput propagate_crystal(const PhaseMatchContext& ctx, const CrystalParams& crystal, SpectralField ordinary,
                                SpectralField extraordinary, double chi, int steps, int threads) {
  const auto& grid = ordinary.grid;
  if (steps < 1) throw ConfigError("steps must be positive");
  const double dz = crystal.length / steps;
  const auto ref = dispersion_sample(crystal.material, Polarization::ordinary, crystal.theta, ctx.omega1);
  const auto h1 = half_step_phases(grid, crystal.material, Polarization::ordinary, crystal.theta, ctx.omega1, ref.k,
                                   ref.k1, dz);
  const auto h0 = half_step_phases(grid, crystal.material, Polarization::extraordinary, crystal.theta, ctx.omega0,
                                   2.0 * ref.k, ref.k1, dz);
  Fft3 fft(grid.nx, grid.ny, grid.nt);
  auto& a1 = ordinary.values;
  auto& a0 = extraordinary.values;
  const std::size_t n = grid.cells();
  const bool coupled = chi != 0.0;

  for (int s = 0; s < steps; ++s) {
    multiply(a1, h1);
    multiply(a0, h0);
    if (coupled) {
      fft(a1, FftDirection::backward);
      fft(a0, FftDirection::backward);
      cplx* p1 = a1.data();
      cplx* p0 = a0.data();
      parallel_for(n, threads, [&](std::size_t c) {
        const cplx x1 = p1[c], x0 = p0[c];
        const cplx m1 = x1 + 0.5 * dz * (2.0 * chi * x0 * std::conj(x1));
        const cplx m0 = x0 + 0.5 * dz * (-chi * x1 * x1);
        p1[c] = x1 + dz * (2.0 * chi * m0 * std::conj(m1));
        p0[c] = x0 + dz * (-chi * m1 * m1);
      });
      fft(a1, FftDirection::forward);
      fft(a0, FftDirection::forward);
    }
    multiply(a1, h1);
    multiply(a0, h0);
    if (coupled && !finite(a1)) {
      throw NumericalError(fmt::format("field overflow at step {} of {} (z = {:.4g} m); gain too high for this grid",
                                       s + 1, steps, (s + 1) * dz));
    }
  }
  ordinary.z += crystal.length;
  extraordinary.z += crystal.length;
  return {std::move(ordinary), std::move(extraordinary)};
}

CrystalOutput propagate_pdc(const PhaseMatchContext& ctx, SpectralField signal, SpectralField pump, double chi,
                            int steps, int threads) {
  signal.polarization = Polarization::ordinary;
  signal.carrier = ctx.omega1;
  pump.polarization = Polarization::extraordinary;
  pump.carrier = ctx.omega0;
  return propagate_crystal(ctx, ctx.pdc, std::move(signal), std::move(pump), chi, steps, threads);
}

SpectralField image_4f_and_filter(SpectralField field, double lambda_min, double lambda_max) {
  const auto& grid = field.grid;
  for (int k = 0; k < grid.nt; ++k) {
    const double lambda = Wavelength::from_angular_frequency(field.carrier + grid.omega(k)).in_meters();
    if (lambda >= lambda_min && lambda <= lambda_max) continue;
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j) field.values(i, j, k) = 0.0;
  }
  return field;
}

CrystalOutput propagate_sfg(const PhaseMatchContext& ctx, SpectralField signal, SpectralField harmonic, double chi,
                            int steps, int threads) {
  signal.z = 0.0;
  harmonic.z = 0.0;
  harmonic.polarization = Polarization::extraordinary;
  harmonic.carrier = ctx.omega0;
  return propagate_crystal(ctx, ctx.sfg, std::move(signal), std::move(harmonic), chi, steps, threads);
}

Spectrum3D to_centered(const GridSpec& grid, const RealGrid& fft_order, Normalization n) {
  Spectrum3D s;
  s.axes[0] = Axis::centered(AxisKind::qx, grid.nx, grid.dqx());
  s.axes[1] = Axis::centered(AxisKind::qy, grid.ny, grid.dqy());
  s.axes[2] = Axis::centered(AxisKind::omega, grid.nt, grid.domega());
  s.values = RealGrid(grid.nx, grid.ny, grid.nt);
  s.normalization = n;
  for (int a = 0; a < grid.nx; ++a) {
    const int i = wrap(a - grid.nx / 2, grid.nx);
    for (int b = 0; b < grid.ny; ++b) {
      const int j = wrap(b - grid.ny / 2, grid.ny);
      for (int c = 0; c < grid.nt; ++c) {
        // Omega = -fft_index dOmega; the Nyquist cell wraps onto the first centered cell
        const int k = wrap(-(c - grid.nt / 2), grid.nt);
        s.values(a, b, c) = fft_order(i, j, k);
      }
    }
  }
  return s;
}

Spectrum3D far_field(const SpectralField& field, bool subtract_vacuum) {
  const auto& g = field.grid;
  RealGrid d(g.nx, g.ny, g.nt);
  const double shift = subtract_vacuum ? 0.5 : 0.0;
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = std::norm(field.values[n]) - shift;
  return to_centered(g, d, Normalization::photons_per_mode);
}

ExperimentResult run_experiment(const RunConfig& config, const std::vector<double>& dthetas) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  for (double a : dthetas) {
    auto c = config;
    c.dtheta = a;
    check_resolution(c);
  }
  const auto& grid = config.grid;
  const auto base = config.context();
  const double peak = pump_peak_amplitude(grid, config.pump);
  const double chi = coupling_for_gain(config.pdc.gain, peak, config.pdc.length);
  const double chi_sfg = chi * config.sfg.sigma / config.pdc.sigma;

  std::vector<RealGrid> sfg_sum(dthetas.size(), RealGrid(grid.nx, grid.ny, grid.nt));
  std::vector<ComplexGrid> sfg_mean(dthetas.size(), ComplexGrid(grid.nx, grid.ny, grid.nt));
  RealGrid pdc_sum(grid.nx, grid.ny, grid.nt);
  const auto pump = pump_field(grid, config.pump, peak);

  for (int r = 0; r < config.realizations; ++r) {
    const auto stream = realization_seed(config.seed, 2 * static_cast<std::uint64_t>(r));
    auto pdc = propagate_pdc(base, seed_vacuum(grid, stream), pump, chi, config.steps_pdc, config.threads);
    for (std::size_t n = 0; n < pdc_sum.size(); ++n) pdc_sum[n] += std::norm(pdc.ordinary.values[n]) - 0.5;
    const auto filtered = image_4f_and_filter(std::move(pdc.ordinary), config.filter_min, config.filter_max);

    for (std::size_t a = 0; a < dthetas.size(); ++a) {
      const auto ctx = base.with_sfg_detuning(dthetas[a]);
      SpectralField harmonic = config.seed_sfg_vacuum
                                   ? seed_vacuum(grid, realization_seed(config.seed, 2 * static_cast<std::uint64_t>(r) + 1))
                                   : empty_field(grid, Polarization::extraordinary, ctx.omega0);
      const auto out = propagate_sfg(ctx, filtered, std::move(harmonic), chi_sfg, config.steps_sfg, config.threads);
      const double shift = config.seed_sfg_vacuum ? 0.5 : 0.0;
      auto& acc = sfg_sum[a];
      auto& mean = sfg_mean[a];
      for (std::size_t n = 0; n < acc.size(); ++n) {
        acc[n] += std::norm(out.extraordinary.values[n]) - shift;
        mean[n] += out.extraordinary.values[n];
      }
    }
  }

  ExperimentResult result;
  result.dthetas = dthetas;
  const double inv = 1.0 / config.realizations;
  const int m = config.realizations;
  for (std::size_t a = 0; a < dthetas.size(); ++a) {
    auto& acc = sfg_sum[a];
    for (auto& v : acc.storage()) v *= inv;
    result.sfg.push_back(to_centered(grid, acc, Normalization::photons_per_mode));
    if (m < 2) continue;
    // unbiased split of <|c|^2> into |<c>|^2 and the variance
    RealGrid coh(grid.nx, grid.ny, grid.nt);
    RealGrid inc(grid.nx, grid.ny, grid.nt);
    for (std::size_t n = 0; n < acc.size(); ++n) {
      const double mean2 = std::norm(sfg_mean[a][n] * inv);
      inc[n] = (acc[n] - mean2) * m / (m - 1.0);
      coh[n] = acc[n] - inc[n];
    }
    result.sfg_coherent.push_back(to_centered(grid, coh, Normalization::photons_per_mode));
    result.sfg_incoherent.push_back(to_centered(grid, inc, Normalization::photons_per_mode));
  }
  for (auto& v : pdc_sum.storage()) v *= inv;
  result.pdc = to_centered(grid, pdc_sum, Normalization::photons_per_mode);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ExperimentResult run_experiment(const RunConfig& config) { return run_experiment(config, {config.dtheta}); }

} // namespace upconv
