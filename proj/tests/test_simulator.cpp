#include <doctest.h>

#include <cmath>
#include <array>
#include <numeric>
#include <random>

#include "upconv/errors.hpp"
#include "upconv/fft.hpp"
#include "upconv/simulator.hpp"

using namespace upconv;

namespace {

using cplx = std::complex<double>;

/// 32 x 32 x 64 grid that still resolves the default crystals.
GridSpec small_grid() {
  GridSpec g;
  g.nx = g.ny = 32;
  g.nt = 64;
  g.dx = g.dy = 200e-6;
  g.dt = 150e-15;
  return g;
}

RunConfig small_config() {
  auto c = default_run_config();
  c.grid = small_grid();
  c.steps_pdc = c.steps_sfg = 100;
  return c;
}

SpectralField zeros(const GridSpec& g, Polarization pol, double carrier) {
  SpectralField f;
  f.grid = g;
  f.polarization = pol;
  f.carrier = carrier;
  f.values = ComplexGrid(g.nx, g.ny, g.nt);
  return f;
}

/// Random amplitudes restricted to |fft index| below (bx, by, bt).
SpectralField band_limited(const GridSpec& g, double carrier, int bx, int by, int bt, unsigned seed) {
  auto f = zeros(g, Polarization::ordinary, carrier);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nt; ++k) {
        const int a = fft_index(i, g.nx), b = fft_index(j, g.ny), c = fft_index(k, g.nt);
        if (a < -bx || a >= bx || b < -by || b >= by || c < -bt || c >= bt) continue;
        const double re = n(rng);
        f.values(i, j, k) = cplx(re, n(rng));
      }
  return f;
}

double l2_diff(const ComplexGrid& a, const ComplexGrid& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    num += std::norm(a[n] - b[n]);
    den += std::norm(b[n]);
  }
  return std::sqrt(num / den);
}

double l2_diff(const RealGrid& a, const RealGrid& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    num += (a[n] - b[n]) * (a[n] - b[n]);
    den += b[n] * b[n];
  }
  return std::sqrt(num / den);
}

double l2_norm(const RealGrid& a) {
  double s = 0.0;
  for (double v : a.storage()) s += v * v;
  return std::sqrt(s);
}

/// Moving-frame wavenumber offset of one mode, as seen by the oracle.
double frame_k(const CrystalParams& c, Polarization pol, double carrier, double ref_k, double ref_k1, double qx,
               double qy, double om) {
  const Eigen::Vector2d q(qx, qy);
  const auto kz = pol == Polarization::ordinary ? kz_ordinary(c.material, carrier, q, om)
                                                : kz_extraordinary(c.material, carrier, c.theta, q, om);
  REQUIRE(kz.has_value());
  return *kz - ref_k - ref_k1 * om;
}

/// First-order SFG output by direct quadrature over all pairs w1 + w2 = w.
ComplexGrid perturbative_sfg(const PhaseMatchContext& ctx, const SpectralField& signal, double chi) {
  const auto& g = signal.grid;
  const auto& c = ctx.sfg;
  const auto ref = dispersion_sample(c.material, Polarization::ordinary, c.theta, ctx.omega1);
  const double l = c.length;
  std::vector<std::array<int, 3>> support;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nt; ++k)
        if (signal.values(i, j, k) != 0.0) support.push_back({i, j, k});
  std::vector<double> l1(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) {
    const auto [i, j, k] = support[s];
    l1[s] = frame_k(c, Polarization::ordinary, ctx.omega1, ref.k, ref.k1, g.qx(i), g.qy(j), g.omega(k));
  }
  ComplexGrid out(g.nx, g.ny, g.nt);
  const double scale = -chi / std::sqrt(static_cast<double>(g.cells()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    for (std::size_t r = 0; r < support.size(); ++r) {
      const int i = (support[s][0] + support[r][0]) % g.nx;
      const int j = (support[s][1] + support[r][1]) % g.ny;
      const int k = (support[s][2] + support[r][2]) % g.nt;
      const double l0 = frame_k(c, Polarization::extraordinary, ctx.omega0, 2.0 * ref.k, ref.k1, g.qx(i), g.qy(j),
                                g.omega(k));
      const double delta = l1[s] + l1[r] - l0;
      const double h = 0.5 * delta * l;
      const double sinc = std::abs(h) < 1e-12 ? 1.0 : std::sin(h) / h;
      const cplx pair = signal.values(support[s][0], support[s][1], support[s][2]) *
                        signal.values(support[r][0], support[r][1], support[r][2]);
      out(i, j, k) += scale * pair * l * std::polar(sinc, h) * std::polar(1.0, l0 * l);
    }
  }
  return out;
}

} // namespace

TEST_CASE("grid spec: Fourier pairs and validation") {
  const auto g = small_grid();
  CHECK(g.dqx() == doctest::Approx(two_pi / (32 * 200e-6)));
  CHECK(g.domega() == doctest::Approx(two_pi / (64 * 150e-15)));
  CHECK(g.omega(1) == doctest::Approx(-g.domega()));
  CHECK(g.qx(31) == doctest::Approx(-g.dqx()));
  auto bad = g;
  bad.nt = 48;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("run config: resolution and step preconditions") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  auto coarse = c;
  coarse.grid.dx = coarse.grid.dy = 100e-6;
  CHECK_THROWS_AS(coarse.validate(), ResolutionError);
  auto short_t = c;
  short_t.grid.dt = 40e-15;
  CHECK_THROWS_AS(short_t.validate(), ResolutionError);
  auto few = c;
  few.steps_sfg = 50;
  CHECK_THROWS_AS(few.validate(), ConfigError);
  auto filter = c;
  filter.filter_max = 1500e-9;
  CHECK_THROWS_AS(filter.validate(), ConfigError);
  CHECK_NOTHROW(default_run_config().validate());
}

TEST_CASE("vacuum: Wigner statistics and determinism") {
  GridSpec g;
  g.nx = g.ny = 16;
  g.nt = 64;
  const auto f = seed_vacuum(g, 11);
  const auto n = static_cast<double>(g.cells());
  double m2 = 0.0, re2 = 0.0, im2 = 0.0, reim = 0.0;
  cplx mean = 0.0, msq = 0.0;
  for (const auto& v : f.values.storage()) {
    m2 += std::norm(v);
    re2 += v.real() * v.real();
    im2 += v.imag() * v.imag();
    reim += v.real() * v.imag();
    mean += v;
    msq += v * v;
  }
  // |c|^2 is exponential with mean 1/2, so its standard deviation is 1/2 as well
  CHECK(std::abs(m2 / n - 0.5) < 3.0 * 0.5 / std::sqrt(n));
  CHECK(std::abs(re2 / n - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / n));
  CHECK(std::abs(im2 / n - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / n));
  CHECK(std::abs(reim / n) < 3.0 * 0.25 / std::sqrt(n));
  CHECK(std::abs(mean / n) < 3.0 * std::sqrt(0.5 / n));
  CHECK(std::abs(msq / n) < 3.0 * 0.5 / std::sqrt(n));

  CHECK(seed_vacuum(g, 11).values == f.values);
  CHECK_FALSE(seed_vacuum(g, 12).values == f.values);
  CHECK(realization_seed(3, 0) != realization_seed(3, 1));
  CHECK(realization_seed(3, 0) != realization_seed(4, 0));
}

TEST_CASE("far field: ordering correction and Parseval") {
  GridSpec g;
  g.nx = g.ny = 8;
  g.nt = 16;
  RealGrid mean(g.nx, g.ny, g.nt);
  const int m = 400;
  for (int r = 0; r < m; ++r) {
    const auto s = far_field(seed_vacuum(g, realization_seed(9, r)), true);
    for (std::size_t n = 0; n < mean.size(); ++n) mean[n] += s.values[n] / m;
  }
  const double total = std::accumulate(mean.storage().begin(), mean.storage().end(), 0.0);
  CHECK(std::abs(total) < 3.0 * 0.5 * std::sqrt(static_cast<double>(g.cells()) / m));

  auto f = seed_vacuum(g, 2);
  const auto s = far_field(f, false);
  const double spectral = std::accumulate(s.values.storage().begin(), s.values.storage().end(), 0.0);
  Fft3 fft(g.nx, g.ny, g.nt);
  fft(f.values, FftDirection::backward);
  CHECK(spectral == doctest::Approx(f.total()).epsilon(1e-12));
}

TEST_CASE("far field: centered order places Omega and q on the axes") {
  GridSpec g;
  g.nx = 8;
  g.ny = 4;
  g.nt = 16;
  auto f = zeros(g, Polarization::extraordinary, 0.0);
  f.values(fft_bin(2, 8), fft_bin(-1, 4), fft_bin(3, 16)) = 1.0;
  const auto s = far_field(f, false);
  int hit = 0;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 16; ++c) {
        if (s.values(a, b, c) == 0.0) continue;
        ++hit;
        CHECK(s.axes[0].value(a) == doctest::Approx(g.qx(fft_bin(2, 8))));
        CHECK(s.axes[1].value(b) == doctest::Approx(g.qy(fft_bin(-1, 4))));
        CHECK(s.axes[2].value(c) == doctest::Approx(g.omega(fft_bin(3, 16))));
      }
  CHECK(hit == 1);
}

TEST_CASE("linear propagation: Parseval to 1e-10") {
  const auto c = small_config();
  const auto ctx = c.context();
  const auto g = c.grid;
  const auto in = seed_vacuum(g, 5);
  auto pump = band_limited(g, ctx.omega0, 4, 4, 8, 6);
  const auto out = propagate_pdc(ctx, in, pump, 0.0, 137);
  CHECK(std::abs(out.ordinary.total() / in.total() - 1.0) < 1e-10);
  CHECK(std::abs(out.extraordinary.total() / pump.total() - 1.0) < 1e-10);
  CHECK(out.ordinary.z == doctest::Approx(ctx.pdc.length));
}

TEST_CASE("pdc: zero pump leaves the signal unchanged up to the linear phase") {
  const auto c = small_config();
  const auto ctx = c.context();
  const auto g = c.grid;
  const auto in = seed_vacuum(g, 5);
  const auto empty = zeros(g, Polarization::extraordinary, ctx.omega0);
  const auto peak = pump_peak_amplitude(g, c.pump);
  const auto chi = coupling_for_gain(c.pdc.gain, peak, c.pdc.length);
  const auto free = propagate_pdc(ctx, in, empty, 0.0, 100);
  const auto driven = propagate_pdc(ctx, in, empty, chi, 100);
  CHECK(l2_diff(driven.ordinary.values, free.ordinary.values) < 1e-9);
  for (std::size_t n = 0; n < in.values.size(); ++n) {
    REQUIRE(std::abs(std::abs(free.ordinary.values[n]) - std::abs(in.values[n])) < 1e-12);
  }
}

TEST_CASE("pdc: photon yield is quadratic in the pump amplitude at low gain") {
  auto c = small_config();
  const auto ctx = c.context();
  const auto g = c.grid;
  const auto peak = pump_peak_amplitude(g, c.pump);
  const auto pump = pump_field(g, c.pump, peak);
  const auto vac = seed_vacuum(g, 21);
  // the linear term is vacuum-seeded noise; the even part isolates the mean gain
  auto even = [&](double gain) {
    const double chi = coupling_for_gain(gain, peak, c.pdc.length);
    const double plus = propagate_pdc(ctx, vac, pump, chi, 100).ordinary.total();
    const double minus = propagate_pdc(ctx, vac, pump, -chi, 100).ordinary.total();
    return 0.5 * (plus + minus) - vac.total();
  };
  const double n1 = even(0.01);
  const double n2 = even(0.02);
  CHECK(n1 > 0.0);
  CHECK(n2 / n1 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("filter: identity inside the window, zero outside") {
  const auto g = small_grid();
  auto f = seed_vacuum(g, 4);
  f.carrier = two_pi * speed_of_light / 1055e-9;
  const double lmin = 1050e-9, lmax = 1070e-9;
  const auto out = image_4f_and_filter(f, lmin, lmax);
  int kept = 0, cut = 0;
  for (int k = 0; k < g.nt; ++k) {
    const double lambda = two_pi * speed_of_light / (f.carrier + g.omega(k));
    const bool inside = lambda >= lmin && lambda <= lmax;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        if (inside) {
          REQUIRE(out.values(i, j, k) == f.values(i, j, k));
        } else {
          REQUIRE(out.values(i, j, k) == cplx(0.0));
        }
      }
    (inside ? kept : cut) += 1;
  }
  CHECK(kept > 0);
  CHECK(cut > 0);
  CHECK(out.total() <= f.total());
}

TEST_CASE("sfg: zero signal gives zero harmonic; quadratic amplitude scaling") {
  const auto c = small_config();
  const auto ctx = c.context();
  const auto g = c.grid;
  const auto empty = zeros(g, Polarization::extraordinary, ctx.omega0);
  const auto none = propagate_sfg(ctx, zeros(g, Polarization::ordinary, ctx.omega1), empty, 1e-3, 100);
  CHECK(none.extraordinary.total() == 0.0);

  const auto s = band_limited(g, ctx.omega1, 4, 4, 8, 8);
  auto s3 = s;
  for (auto& v : s3.values.storage()) v *= 3.0;
  const auto a = propagate_sfg(ctx, s, empty, 1e-3, 100);
  const auto b = propagate_sfg(ctx, s3, empty, 1e-3, 100);
  auto scaled = a.extraordinary.values;
  for (auto& v : scaled.storage()) v *= 9.0;
  CHECK(l2_diff(b.extraordinary.values, scaled) < 0.05);
}

TEST_CASE("sfg: phase-matched pair grows quadratically with crystal length") {
  auto c = small_config();
  const auto g = c.grid;
  const double chi = 1e-3;
  const cplx amp(3.0, 1.0);
  std::vector<double> power;
  for (double length : {1e-3, 2e-3, 4e-3}) {
    c.sfg.length = length;
    const auto ctx = c.context();
    auto s = zeros(g, Polarization::ordinary, ctx.omega1);
    s.values(0, 0, 0) = amp;
    const auto out = propagate_sfg(ctx, s, zeros(g, Polarization::extraordinary, ctx.omega0), chi, 100);
    const double expected = std::norm(chi * amp * amp * length) / static_cast<double>(g.cells());
    CHECK(std::norm(out.extraordinary.values(0, 0, 0)) == doctest::Approx(expected).epsilon(1e-6));
    power.push_back(std::norm(out.extraordinary.values(0, 0, 0)));
  }
  CHECK(power[1] / power[0] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(power[2] / power[1] == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("sfg: split-step matches the perturbative pair quadrature within 3% L2") {
  const auto c = small_config();
  const auto g = c.grid;
  const auto peak = pump_peak_amplitude(g, c.pump);
  const double chi = 0.01 * coupling_for_gain(c.pdc.gain, peak, c.pdc.length);
  for (double dtheta : {0.0, degrees(0.25)}) {
    const auto ctx = c.context().with_sfg_detuning(dtheta);
    const auto s = band_limited(g, ctx.omega1, 4, 4, 8, 13);
    const auto out = propagate_sfg(ctx, s, zeros(g, Polarization::extraordinary, ctx.omega0), chi, c.steps_sfg);
    const auto oracle = perturbative_sfg(ctx, s, chi);
    CHECK(l2_diff(out.extraordinary.values, oracle) < 0.03);
  }
}

TEST_CASE("pipeline: coherent peak of tuned crystals sits at the origin cell") {
  auto c = small_config();
  const auto r = run_experiment(c);
  const auto& s = r.sfg.front();
  const auto& v = s.values.storage();
  const auto best = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  CHECK(best == s.values.index(s.axes[0].center(), s.axes[1].center(), s.axes[2].center()));
  CHECK(s.axes[2].value(s.axes[2].center()) == 0.0);
  CHECK(r.sfg_coherent.empty());
}

TEST_CASE("pipeline: seeded determinism across reruns and thread counts") {
  auto c = small_config();
  c.realizations = 2;
  const auto a = run_experiment(c);
  c.threads = 3;
  const auto b = run_experiment(c);
  CHECK(a.sfg.front().values == b.sfg.front().values);
  CHECK(a.pdc.values == b.pdc.values);
  CHECK(a.sfg_incoherent.front().values == b.sfg_incoherent.front().values);
  c.seed = 2;
  const auto d = run_experiment(c);
  CHECK_FALSE(d.sfg.front().values == a.sfg.front().values);
}

TEST_CASE("pipeline: ensemble split is non-negative on average and sums to the total") {
  auto c = small_config();
  c.realizations = 3;
  const auto r = run_experiment(c);
  const auto& t = r.sfg.front().values;
  const auto& coh = r.sfg_coherent.front().values;
  const auto& inc = r.sfg_incoherent.front().values;
  double sc = 0.0, si = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n) {
    REQUIRE(coh[n] + inc[n] == doctest::Approx(t[n]).epsilon(1e-12));
    sc += coh[n];
    si += inc[n];
  }
  CHECK(sc > 0.0);
  CHECK(si > 0.0);
}

TEST_CASE("split-step: halving dz changes the output by under 1% L2") {
  auto c = small_config();
  c.steps_pdc = c.steps_sfg = 200;
  const auto a = run_experiment(c);
  c.steps_pdc = c.steps_sfg = 400;
  const auto b = run_experiment(c);
  CHECK(l2_diff(a.sfg.front().values, b.sfg.front().values) < 0.01);
  CHECK(l2_diff(a.pdc.values, b.pdc.values) < 0.01);
}

TEST_CASE("pdc: overflow is reported instead of propagating NaN") {
  const auto c = small_config();
  const auto ctx = c.context();
  const auto g = c.grid;
  const auto peak = pump_peak_amplitude(g, c.pump);
  const auto chi = coupling_for_gain(2000.0, peak, c.pdc.length);
  CHECK_THROWS_AS(propagate_pdc(ctx, seed_vacuum(g, 1), pump_field(g, c.pump, peak), chi, 100), NumericalError);
}

TEST_CASE("speckle: realization averaging reduces fluctuation as 1/sqrt(M)") {
  auto c = small_config();
  std::vector<double> lm, lf;
  std::uint64_t seed = 100;
  for (int m : {1, 2, 4, 8}) {
    c.realizations = m;
    c.seed = seed++;
    const auto a = run_experiment(c);
    c.seed = seed++;
    const auto b = run_experiment(c);
    RealGrid sum = a.sfg.front().values;
    RealGrid diff = sum;
    for (std::size_t n = 0; n < sum.size(); ++n) {
      sum[n] += b.sfg.front().values[n];
      diff[n] -= b.sfg.front().values[n];
    }
    lm.push_back(std::log(static_cast<double>(m)));
    lf.push_back(std::log(l2_norm(diff) / l2_norm(sum)));
  }
  const double mx = std::accumulate(lm.begin(), lm.end(), 0.0) / lm.size();
  const double my = std::accumulate(lf.begin(), lf.end(), 0.0) / lf.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lm.size(); ++i) {
    sxy += (lm[i] - mx) * (lf[i] - my);
    sxx += (lm[i] - mx) * (lm[i] - mx);
  }
  CHECK(sxy / sxx == doctest::Approx(-0.5).epsilon(0.3));
}
