#include "upconv/pwpa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "upconv/errors.hpp"
#include "upconv/fft.hpp"
#include "upconv/parallel.hpp"

namespace upconv {

namespace {

/// cosh G and sinh G / G for G^2 = x, real in both regimes.
struct GammaTerms {
  double cosh_g;
  double sinhc;
};

GammaTerms gamma_terms(double x) {
  if (std::abs(x) < 1e-8) {
    return {1.0 + x / 2.0 + x * x / 24.0, 1.0 + x / 6.0 + x * x / 120.0};
  }
  if (x > 0.0) {
    const double G = std::sqrt(x);
    return {std::cosh(G), std::sinh(G) / G};
  }
  const double k = std::sqrt(-x);
  return {std::cos(k), std::sin(k) / k};
}

double sinc2(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

/// Transverse wavevector of in-plane coordinate qa and across-plane coordinate qs.
Eigen::Vector2d plane_q(Plane p, double qa, double qs) {
  return p == Plane::xw ? Eigen::Vector2d(qa, qs) : Eigen::Vector2d(qs, qa);
}

/// Box-filtered PDC spectrum and SFG-crystal ordinary kz on the integration grid.
struct IntegrationTable {
  int ni = 0, ns = 0, nk = 0;
  std::vector<double> s;
  std::vector<double> kz;

  std::size_t at(int i, int j, int k) const { return (static_cast<std::size_t>(i) * ns + j) * nk + k; }
};

IntegrationTable build_table(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid) {
  IntegrationTable t;
  t.ni = grid.n_q_int;
  t.ns = grid.stripe;
  t.nk = grid.n_omega_int;
  t.s.assign(static_cast<std::size_t>(t.ni) * t.ns * t.nk, 0.0);
  t.kz.assign(t.s.size(), 0.0);
  const double box = effective_box(ctx, grid.box_half_width);
  for (int i = 0; i < t.ni; ++i) {
    for (int j = 0; j < t.ns; ++j) {
      const auto q = plane_q(grid.plane, (i - t.ni / 2) * grid.dq, (j - t.ns / 2) * grid.dq);
      for (int k = 0; k < t.nk; ++k) {
        const double om = (k - t.nk / 2) * grid.domega;
        if (std::abs(om) > box) continue;
        const auto kz = kz_ordinary(ctx.sfg.material, ctx.omega1, q, om);
        if (!kz) continue;
        try {
          t.s[t.at(i, j, k)] = pdc_spectrum(ctx, {q, om}, g);
          t.kz[t.at(i, j, k)] = *kz;
        } catch (const EvanescentMode&) {
          // partner mode -w is evanescent in the PDC crystal: no pair, no photons
        }
      }
    }
  }
  return t;
}

/// Full-integral value at output in-plane index a and frequency index b (both signed).
double full_cell(const PhaseMatchContext& ctx, const PlaneGrid& grid, const IntegrationTable& t, int a, int b) {
  const double l = ctx.sfg.length;
  const double sl = ctx.sfg.sigma * l;
  const double measure = grid.dq * grid.dq * grid.domega / std::pow(two_pi, 3);
  const int hi = t.ni / 2, hs = t.ns / 2, hk = t.nk / 2;
  std::optional<double> k0;
  try {
    k0 = kz_extraordinary(ctx.sfg.material, ctx.omega0, ctx.sfg.theta, plane_q(grid.plane, a * grid.dq, 0.0),
                          b * grid.domega);
  } catch (const DomainError&) {
  }
  if (!k0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < t.ni; ++i) {
    const int ip = a - i + 2 * hi;
    if (ip < 0 || ip >= t.ni) continue;
    for (int j = 0; j < t.ns; ++j) {
      const int jp = 2 * hs - j;
      if (jp < 0 || jp >= t.ns) continue;
      const double* s1 = &t.s[t.at(i, j, 0)];
      const double* k1 = &t.kz[t.at(i, j, 0)];
      const double* s2 = &t.s[t.at(ip, jp, 0)];
      const double* k2 = &t.kz[t.at(ip, jp, 0)];
      const int klo = std::max(0, b + 2 * hk - t.nk + 1);
      const int khi = std::min(t.nk - 1, b + 2 * hk);
      for (int k = klo; k <= khi; ++k) {
        const int kp = b + 2 * hk - k;
        const double p = s1[k] * s2[kp];
        if (p == 0.0) continue;
        sum += p * sinc2(0.5 * (k1[k] + k2[kp] - *k0) * l);
      }
    }
  }
  return 2.0 * sl * sl * measure * sum;
}

RealGrid table_grid(const IntegrationTable& t) {
  RealGrid f(t.ni, t.ns, t.nk);
  std::copy(t.s.begin(), t.s.end(), f.storage().begin());
  return f;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

} // namespace

GainPair gain_functions(const PhaseMatchContext& ctx, const SpectralMode& w, double g) {
  const double l = ctx.pdc.length;
  const double d = 0.5 * delta_pdc(ctx, w) * l;
  const double k1z = *kz_ordinary(ctx.pdc.material, ctx.omega1, w.q, w.omega);
  const auto gt = gamma_terms(g * g - d * d);
  const cplx phase = std::polar(1.0, k1z * l - d);
  return {phase * cplx(gt.cosh_g, d * gt.sinhc), phase * (g * gt.sinhc)};
}

double pdc_gain_spectrum(double delta_l, double g) {
  const double d = 0.5 * delta_l;
  const double s = gamma_terms(g * g - d * d).sinhc;
  return g * g * s * s;
}

double pdc_spectrum(const PhaseMatchContext& ctx, const SpectralMode& w, double g) {
  return pdc_gain_spectrum(delta_pdc(ctx, w) * ctx.pdc.length, g);
}

cplx biphoton_amplitude(const PhaseMatchContext& ctx, const SpectralMode& w, double g) {
  const double l = ctx.pdc.length;
  const double d = 0.5 * delta_pdc(ctx, w) * l;
  const auto gt = gamma_terms(g * g - d * d);
  return g * std::polar(1.0, ctx.k0_pdc() * l) * gt.sinhc * cplx(gt.cosh_g, d * gt.sinhc);
}

cplx sfg_kernel_from_mismatch(double delta, double sigma, double length) {
  const double x = 0.5 * delta * length;
  const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
  return sigma * length * std::polar(1.0, x) * sinc;
}

cplx sfg_kernel(const PhaseMatchContext& ctx, const SpectralMode& w, const SpectralMode& wp) {
  return sfg_kernel_from_mismatch(delta_sfg_pair(ctx, w, wp), ctx.sfg.sigma, ctx.sfg.length);
}

double effective_box(const PhaseMatchContext& ctx, double box_half_width) {
  const auto& o = ctx.pdc.material.ordinary;
  const double w_min = Wavelength::micrometers(o.lambda_max_um).angular_frequency();
  const double w_max = Wavelength::micrometers(o.lambda_min_um).angular_frequency();
  const double window = std::min(ctx.omega1 - w_min, w_max - ctx.omega1) * (1.0 - 1e-9);
  return std::min(box_half_width, window);
}

CoherentQuadrature default_coherent_quadrature(const PhaseMatchContext& ctx, double g, double box_half_width,
                                               double refine) {
  const auto b = bandwidths(ctx);
  const double box = effective_box(ctx, box_half_width);
  CoherentQuadrature quad;
  quad.dq = 0.2 * std::min(b.q_d, b.q_sw) / refine;
  quad.domega = 0.2 * std::min(b.omega_d, b.omega_gvm) / refine;
  // The X-shaped arms reach |q| ~ q_D |Omega| / Omega_D at the box edge.
  const double q_max = 1.3 * b.q_d * std::sqrt(box * box / (b.omega_d * b.omega_d) + 2.0 * g + 10.0);
  quad.n_q = static_cast<int>(std::ceil(q_max / quad.dq));
  quad.n_omega = 2 * static_cast<int>(std::ceil(box / quad.domega)) + 1;
  return quad;
}

cplx coherent_amplitude(const PhaseMatchContext& ctx, double g, const CoherentQuadrature& quad,
                        double box_half_width, int threads) {
  const auto b = bandwidths(ctx);
  const double q_limit = 0.25 * std::min(b.q_d, b.q_sw);
  const double w_limit = 0.25 * std::min(b.omega_d, b.omega_gvm);
  if (quad.dq > q_limit || quad.domega > w_limit) {
    throw ResolutionError(fmt::format(
        "coherent quadrature under-resolved: dq = {:.4g} 1/m (limit {:.4g}), dOmega = {:.4g} rad/s (limit {:.4g})",
        quad.dq, q_limit, quad.domega, w_limit));
  }
  const double box = effective_box(ctx, box_half_width);
  std::vector<cplx> partial(quad.n_q);
  parallel_for(quad.n_q, threads, [&](std::size_t iq) {
    const double q = (iq + 0.5) * quad.dq;
    cplx sum = 0.0;
    for (int k = 0; k < quad.n_omega; ++k) {
      const double om = (k - quad.n_omega / 2) * quad.domega;
      if (std::abs(om) > box) continue;
      const auto w = mode(q, 0.0, om);
      try {
        sum += biphoton_amplitude(ctx, w, g) * sfg_kernel(ctx, w, -w);
      } catch (const EvanescentMode&) {
      }
    }
    partial[iq] = two_pi * q * sum;
  });
  cplx total = 0.0;
  for (const auto& p : partial) total += p;
  return total * quad.dq * quad.domega / std::pow(two_pi, 1.5);
}

std::string to_string(Plane p) { return p == Plane::xw ? "xw" : "yw"; }

Plane plane_from_string(const std::string& s) {
  if (s == "xw") return Plane::xw;
  if (s == "yw") return Plane::yw;
  throw std::invalid_argument("plane must be 'xw' or 'yw', got '" + s + "'");
}

Axis PlaneGrid::q_axis() const {
  return Axis::centered(plane == Plane::xw ? AxisKind::qx : AxisKind::qy, n_q, dq);
}

Axis PlaneGrid::omega_axis() const { return Axis::centered(AxisKind::omega, n_omega, domega); }

PlaneGrid default_plane_grid(const PhaseMatchContext& ctx, Plane plane) {
  const auto b = bandwidths(ctx);
  PlaneGrid grid;
  grid.plane = plane;
  grid.dq = b.q_sw / 4.5;
  grid.domega = b.omega_gvm / 4.5;
  const double box = effective_box(ctx, grid.box_half_width);
  const double g = ctx.pdc.gain;
  const double q_max = 1.3 * b.q_d * std::sqrt(box * box / (b.omega_d * b.omega_d) + 2.0 * g + 10.0);
  grid.n_q_int = std::max(grid.n_q, 2 * static_cast<int>(std::ceil(q_max / grid.dq)));
  grid.n_omega_int = std::max(grid.n_omega, 2 * static_cast<int>(std::ceil(box / grid.domega)) + 2);
  return grid;
}

void check_resolution(const PhaseMatchContext& ctx, const PlaneGrid& grid) {
  const auto b = bandwidths(ctx);
  if (grid.dq > 0.25 * b.q_sw || grid.domega > 0.25 * b.omega_gvm) {
    throw ResolutionError(
        fmt::format("plane grid under-resolved: dq = {:.4g} 1/m needs < q_SW/4 = {:.4g}, dOmega = {:.4g} rad/s "
                    "needs < Omega_GVM/4 = {:.4g}; refine the grid or shorten the SFG crystal",
                    grid.dq, 0.25 * b.q_sw, grid.domega, 0.25 * b.omega_gvm));
  }
  if (grid.n_q > grid.n_q_int || grid.n_omega > grid.n_omega_int || grid.stripe < 1) {
    throw ResolutionError("output plane must lie inside the integration grid, stripe >= 1");
  }
}

Spectrum2D pdc_spectrum(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid) {
  Spectrum2D out(grid.q_axis(), grid.omega_axis(), Normalization::photons_per_mode);
  const double box = effective_box(ctx, grid.box_half_width);
  for (int a = 0; a < grid.n_q; ++a) {
    for (int b = 0; b < grid.n_omega; ++b) {
      const double om = out.second.value(b);
      if (std::abs(om) > box) continue;
      try {
        out.values(a, b) = pdc_spectrum(ctx, {plane_q(grid.plane, out.first.value(a), 0.0), om}, g);
      } catch (const EvanescentMode&) {
      }
    }
  }
  return out;
}

Spectrum2D incoherent_spectrum_full(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid, int threads) {
  check_resolution(ctx, grid);
  const auto table = build_table(ctx, g, grid);
  Spectrum2D out(grid.q_axis(), grid.omega_axis());
  const std::size_t cells = static_cast<std::size_t>(grid.n_q) * grid.n_omega;
  parallel_for(cells, threads, [&](std::size_t n) {
    const int row = static_cast<int>(n / grid.n_omega);
    const int col = static_cast<int>(n % grid.n_omega);
    out.values(row, col) = full_cell(ctx, grid, table, row - grid.n_q / 2, col - grid.n_omega / 2);
  });
  return out;
}

Eigen::ArrayXd incoherent_column_full(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid, int q_index,
                                      int threads) {
  check_resolution(ctx, grid);
  const auto table = build_table(ctx, g, grid);
  Eigen::ArrayXd out(grid.n_omega);
  parallel_for(grid.n_omega, threads, [&](std::size_t col) {
    out[col] = full_cell(ctx, grid, table, q_index, static_cast<int>(col) - grid.n_omega / 2);
  });
  return out;
}

Eigen::ArrayXd incoherent_column_full(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid, int q_index,
                                      int first, int count, int threads) {
  check_resolution(ctx, grid);
  const auto table = build_table(ctx, g, grid);
  Eigen::ArrayXd out(count);
  parallel_for(count, threads, [&](std::size_t n) {
    out[n] = full_cell(ctx, grid, table, q_index, first + static_cast<int>(n));
  });
  return out;
}

Spectrum2D pdc_self_convolution(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid) {
  const auto table = build_table(ctx, g, grid);
  const double measure = grid.dq * grid.dq * grid.domega / std::pow(two_pi, 3);
  const auto conv = self_convolution(table_grid(table), measure);
  Spectrum2D out(grid.q_axis(), grid.omega_axis());
  for (int a = 0; a < grid.n_q; ++a) {
    for (int b = 0; b < grid.n_omega; ++b) {
      out.values(a, b) = conv(a - grid.n_q / 2 + table.ni / 2, table.ns / 2, b - grid.n_omega / 2 + table.nk / 2);
    }
  }
  return out;
}

Spectrum2D propagation_factor(const PhaseMatchContext& ctx, const PlaneGrid& grid) {
  Spectrum2D out(grid.q_axis(), grid.omega_axis());
  const double sl = ctx.sfg.sigma * ctx.sfg.length;
  for (int a = 0; a < grid.n_q; ++a) {
    for (int b = 0; b < grid.n_omega; ++b) {
      try {
        const double d = d_inc(ctx, {plane_q(grid.plane, out.first.value(a), 0.0), out.second.value(b)});
        out.values(a, b) = sl * sl * sinc2(0.5 * d * ctx.sfg.length);
      } catch (const std::domain_error&) {
      }
    }
  }
  return out;
}

Spectrum2D incoherent_spectrum_factorized(const PhaseMatchContext& ctx, double g, const PlaneGrid& grid) {
  auto v = pdc_self_convolution(ctx, g, grid);
  const auto w = propagation_factor(ctx, grid);
  v.values = 2.0 * w.values * v.values;
  return v;
}

RealGrid self_convolution(const RealGrid& f, double measure) {
  const int n0 = f.dim(0), n1 = f.dim(1), n2 = f.dim(2);
  const int p0 = next_pow2(2 * n0), p1 = n1 == 1 ? 1 : next_pow2(2 * n1), p2 = next_pow2(2 * n2);
  ComplexGrid buf(p0, p1, p2);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k) buf(i, j, k) = f(i, j, k);
  Fft3 fft(p0, p1, p2);
  fft(buf, FftDirection::forward);
  // unitary transforms: conv = sqrt(N) * F^-1[(F f)^2]
  const double scale = std::sqrt(static_cast<double>(buf.size()));
  for (auto& v : buf.storage()) v = v * v * scale;
  fft(buf, FftDirection::backward);
  RealGrid out(n0, n1, n2);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k) {
        out(i, j, k) = measure * std::max(0.0, buf(i + n0 / 2, j + n1 / 2, k + n2 / 2).real());
      }
  return out;
}

Spectrum2D self_convolution(const Spectrum2D& s, double measure) {
  RealGrid f(static_cast<int>(s.values.rows()), 1, static_cast<int>(s.values.cols()));
  for (int i = 0; i < f.dim(0); ++i)
    for (int k = 0; k < f.dim(2); ++k) f(i, 0, k) = s.values(i, k);
  const auto c = self_convolution(f, measure);
  Spectrum2D out(s.first, s.second, s.normalization);
  for (int i = 0; i < f.dim(0); ++i)
    for (int k = 0; k < f.dim(2); ++k) out.values(i, k) = c(i, 0, k);
  return out;
}

} // namespace upconv
