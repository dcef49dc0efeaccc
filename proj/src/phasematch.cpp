#include "upconv/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "upconv/errors.hpp"

namespace upconv {

namespace {

double require_kz(std::optional<double> kz, const char* what, const SpectralMode& w) {
  if (!kz) {
    throw EvanescentMode(fmt::format("{} evanescent at q = ({}, {}) 1/m, Omega = {} rad/s", what, w.q.x(),
                                     w.q.y(), w.omega));
  }
  return *kz;
}

double k1z_sfg(const PhaseMatchContext& ctx, const SpectralMode& w) {
  return require_kz(kz_ordinary(ctx.sfg.material, ctx.omega1, w.q, w.omega), "ordinary mode", w);
}

double k0z_sfg(const PhaseMatchContext& ctx, const SpectralMode& w) {
  return require_kz(kz_extraordinary(ctx.sfg.material, ctx.omega0, ctx.sfg.theta, w.q, w.omega),
                    "extraordinary mode", w);
}

/// Bisection on f over an interval grown from [center - width, center + width]
/// until f changes sign. f returns nullopt outside its domain.
std::optional<double> bracketed_root(const std::function<std::optional<double>(double)>& f, double center,
                                     double width, double tolerance) {
  for (int attempt = 0; attempt < 24; ++attempt, width *= 2.0) {
    const double lo = center - width;
    const double hi = center + width;
    const auto flo = f(lo);
    const auto fhi = f(hi);
    if (!flo || !fhi) {
      // Ran off the dispersion window before bracketing a root.
      return std::nullopt;
    }
    if (*flo == 0.0) return lo;
    if (*fhi == 0.0) return hi;
    if ((*flo < 0.0) != (*fhi < 0.0)) {
      auto plain = [&](double x) {
        const auto v = f(x);
        return v ? *v : std::numeric_limits<double>::quiet_NaN();
      };
      auto stop = [tolerance](double a, double b) { return std::abs(b - a) <= tolerance; };
      const auto [a, b] = boost::math::tools::bisect(plain, lo, hi, stop);
      return 0.5 * (a + b);
    }
  }
  return std::nullopt;
}

std::optional<double> d_inc_checked(const PhaseMatchContext& ctx, const Eigen::Vector2d& q, double omega) {
  const double w = ctx.omega0 + omega;
  const auto lambda = Wavelength::from_angular_frequency(w);
  if (!ctx.sfg.material.ordinary.contains(lambda) || !ctx.sfg.material.extraordinary.contains(lambda)) {
    return std::nullopt;
  }
  const auto k0z = kz_extraordinary(ctx.sfg.material, ctx.omega0, ctx.sfg.theta, q, omega);
  if (!k0z) return std::nullopt;
  return ctx.k0_pdc() - *k0z + ctx.ordinary_sfg.k1 * omega;
}

/// Wavelength tolerance of 1e-4 nm expressed as a frequency offset at the pump.
double omega_tolerance(const PhaseMatchContext& ctx) {
  return ctx.omega0 * 1e-13 / ctx.pump_wavelength().in_meters();
}

} // namespace

PhaseMatchContext PhaseMatchContext::make(const CrystalParams& pdc, const CrystalParams& sfg, Wavelength pump) {
  pdc.validate();
  sfg.validate();
  PhaseMatchContext ctx;
  ctx.pdc = pdc;
  ctx.sfg = sfg;
  ctx.omega0 = pump.angular_frequency();
  ctx.omega1 = 0.5 * ctx.omega0;
  ctx.ordinary_pdc = dispersion_sample(pdc.material, Polarization::ordinary, pdc.theta, ctx.omega1);
  ctx.extraordinary_pdc = dispersion_sample(pdc.material, Polarization::extraordinary, pdc.theta, ctx.omega0);
  ctx.ordinary_sfg = dispersion_sample(sfg.material, Polarization::ordinary, sfg.theta, ctx.omega1);
  ctx.extraordinary_sfg = dispersion_sample(sfg.material, Polarization::extraordinary, sfg.theta, ctx.omega0);
  return ctx;
}

PhaseMatchContext PhaseMatchContext::with_sfg_detuning(double dtheta) const {
  auto sfg_crystal = sfg;
  sfg_crystal.theta = pdc.theta + dtheta;
  return make(pdc, sfg_crystal, pump_wavelength());
}

PhaseMatchContext PhaseMatchContext::with_sfg_length(double length) const {
  auto sfg_crystal = sfg;
  sfg_crystal.length = length;
  return make(pdc, sfg_crystal, pump_wavelength());
}

PhaseMatchContext PhaseMatchContext::with_pdc_length(double length) const {
  auto pdc_crystal = pdc;
  pdc_crystal.length = length;
  return make(pdc_crystal, sfg, pump_wavelength());
}

double tune_collinear(const Material& material, Wavelength pump, double guess) {
  const double w0 = pump.angular_frequency();
  const double k1 = *try_wavenumber(material, Polarization::ordinary, 0.0, 0.5 * w0);
  auto mismatch = [&](double theta) -> std::optional<double> {
    if (theta <= 0.0 || theta >= pi / 2) return std::nullopt;
    return 2.0 * k1 - *try_wavenumber(material, Polarization::extraordinary, theta, w0);
  };
  const auto root = bracketed_root(mismatch, guess, degrees(1.0), 1e-13);
  if (!root) {
    throw DomainError(fmt::format("no collinear phase-matching angle for {} at {} nm", material.name,
                                  pump.in_nanometers()));
  }
  return *root;
}

PhaseMatchContext default_context() {
  const auto pump = Wavelength::nanometers(527.5);
  CrystalParams pdc;
  pdc.material = bbo();
  pdc.length = 4e-3;
  pdc.gain = 9.3;
  pdc.theta = tune_collinear(pdc.material, pump);
  CrystalParams sfg = pdc;
  sfg.length = 1e-3;
  sfg.gain = 0.0;
  return PhaseMatchContext::make(pdc, sfg, pump);
}

double delta_pdc(const PhaseMatchContext& ctx, const SpectralMode& w) {
  const auto& m = ctx.pdc.material;
  const double a = require_kz(kz_ordinary(m, ctx.omega1, w.q, w.omega), "ordinary mode", w);
  const double b = require_kz(kz_ordinary(m, ctx.omega1, -w.q, -w.omega), "ordinary mode", -w);
  return a + b - ctx.k0_pdc();
}

double delta_sfg_pair(const PhaseMatchContext& ctx, const SpectralMode& w, const SpectralMode& wp) {
  return k1z_sfg(ctx, w) + k1z_sfg(ctx, wp) - k0z_sfg(ctx, w + wp);
}

double delta_sfg(const PhaseMatchContext& ctx, const SpectralMode& w) { return delta_sfg_pair(ctx, w, -w); }

double d_inc(const PhaseMatchContext& ctx, const SpectralMode& w) {
  return ctx.k0_pdc() - k0z_sfg(ctx, w) + ctx.ordinary_sfg.k1 * w.omega;
}

Bandwidths bandwidths(const PhaseMatchContext& ctx) {
  const double gvm = ctx.extraordinary_sfg.k1 - ctx.ordinary_sfg.k1;
  const double rho = ctx.extraordinary_sfg.walkoff;
  if (!(gvm > 0.0)) {
    throw std::domain_error(fmt::format("group-velocity mismatch k0' - k1' = {} s/m is not positive", gvm));
  }
  if (!(rho > 0.0)) {
    throw std::domain_error(fmt::format("walk-off angle {} rad is not positive", rho));
  }
  if (!(ctx.ordinary_pdc.k2 > 0.0)) {
    throw std::domain_error("ordinary group-velocity dispersion k1'' is not positive");
  }
  Bandwidths b;
  b.omega_d = 1.0 / std::sqrt(ctx.ordinary_pdc.k2 * ctx.pdc.length);
  b.q_d = std::sqrt(ctx.ordinary_pdc.k / ctx.pdc.length);
  b.omega_gvm = 1.0 / (gvm * ctx.sfg.length);
  b.q_sw = 1.0 / (rho * ctx.sfg.length);
  return b;
}

ThresholdLengths threshold_lengths(const PhaseMatchContext& ctx) {
  const double gvm = ctx.extraordinary_sfg.k1 - ctx.ordinary_sfg.k1;
  ThresholdLengths t;
  t.walkoff = std::sqrt(ctx.pdc.length / ctx.ordinary_pdc.k) / ctx.extraordinary_sfg.walkoff;
  t.gvm = std::sqrt(ctx.ordinary_pdc.k2 * ctx.pdc.length) / gvm;
  return t;
}

double critical_angle(const PhaseMatchContext& ctx, double gain) {
  return 2.0 * std::sqrt(pi * pi + gain * gain) /
         (ctx.extraordinary_sfg.walkoff * ctx.k0_pdc() * ctx.sfg.length);
}

double sigma_prime_omega(const PhaseMatchContext& ctx, double qx) {
  const auto b = bandwidths(ctx);
  return b.omega_gvm * (qx / b.q_sw + (ctx.k0_pdc() - ctx.k0_sfg()) * ctx.sfg.length);
}

std::optional<double> sigma_omega(const PhaseMatchContext& ctx, const Eigen::Vector2d& q) {
  const auto b = bandwidths(ctx);
  auto f = [&](double omega) { return d_inc_checked(ctx, q, omega); };
  return bracketed_root(f, sigma_prime_omega(ctx, q.x()), 3.0 * two_pi * b.omega_gvm, omega_tolerance(ctx));
}

std::optional<double> sigma_qx(const PhaseMatchContext& ctx, double omega) {
  const auto b = bandwidths(ctx);
  const double guess = b.q_sw * (omega / b.omega_gvm - (ctx.k0_pdc() - ctx.k0_sfg()) * ctx.sfg.length);
  auto f = [&](double qx) { return d_inc_checked(ctx, Eigen::Vector2d(qx, 0.0), omega); };
  return bracketed_root(f, guess, 3.0 * two_pi * b.q_sw, 1e-9 * b.q_sw);
}

Wavelength lambda_inc(const PhaseMatchContext& ctx, double dtheta) {
  const auto tilted = ctx.with_sfg_detuning(dtheta);
  const auto omega = sigma_omega(tilted, Eigen::Vector2d::Zero());
  if (!omega) {
    throw std::domain_error(
        fmt::format("no incoherent phase-matching root for detuning {} deg", to_degrees(dtheta)));
  }
  return Wavelength::from_angular_frequency(ctx.omega0 + *omega);
}

double lambda_inc_linear_slope(const PhaseMatchContext& ctx) {
  const double lambda0 = ctx.pump_wavelength().in_meters();
  const double n0 = index_extraordinary(ctx.pdc.material, ctx.pdc.theta, ctx.pump_wavelength());
  const double gvm = ctx.extraordinary_sfg.k1 - ctx.ordinary_sfg.k1;
  return -n0 * ctx.extraordinary_sfg.walkoff * lambda0 / (speed_of_light * gvm);
}

Wavelength lambda_inc_linear(const PhaseMatchContext& ctx, double dtheta) {
  return Wavelength::meters(ctx.pump_wavelength().in_meters() + lambda_inc_linear_slope(ctx) * dtheta);
}

std::vector<LambdaIncRow> lambda_inc_sweep(const PhaseMatchContext& ctx, std::vector<double> angles) {
  std::ranges::sort(angles);
  std::vector<LambdaIncRow> rows;
  rows.reserve(angles.size());
  for (double a : angles) {
    rows.push_back({a, lambda_inc(ctx, a).in_meters(), lambda_inc_linear(ctx, a).in_meters()});
  }
  return rows;
}

} // namespace upconv
