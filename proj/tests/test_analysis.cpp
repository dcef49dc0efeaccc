#include <doctest.h>

#include <cmath>

#include "upconv/analysis.hpp"
#include "upconv/errors.hpp"

using namespace upconv;

namespace {

Spectrum3D cube(int n0, int n1, int n2, double fill = 0.0) {
  Spectrum3D s;
  s.axes[0] = Axis::centered(AxisKind::qx, n0, 100.0);
  s.axes[1] = Axis::centered(AxisKind::qy, n1, 100.0);
  s.axes[2] = Axis::centered(AxisKind::omega, n2, 1e12);
  s.values = RealGrid(n0, n1, n2, fill);
  return s;
}

Spectrum2D plane(int rows, int cols) {
  return Spectrum2D(Axis::centered(AxisKind::qx, rows, 1e3), Axis::centered(AxisKind::omega, cols, 1e12));
}

RunConfig small_config() {
  auto c = default_run_config();
  c.grid.nx = c.grid.ny = 32;
  c.grid.nt = 64;
  c.grid.dx = c.grid.dy = 200e-6;
  c.grid.dt = 150e-15;
  c.steps_pdc = c.steps_sfg = 100;
  return c;
}

} // namespace

TEST_CASE("slice: single-row slit returns the zero row exactly") {
  auto s = cube(8, 6, 10);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 6; ++b)
      for (int c = 0; c < 10; ++c) s.values(a, b, c) = 100 * a + 10 * b + c;
  const auto xw = slice_spectrum(s, {Plane::xw, 1, AxisMode::frequency});
  CHECK(xw.first.kind == AxisKind::qx);
  CHECK(xw.values.rows() == 8);
  CHECK(xw.values(5, 7) == s.values(5, 3, 7));
  const auto yw = slice_spectrum(s, {Plane::yw, 1, AxisMode::frequency});
  CHECK(yw.first.kind == AxisKind::qy);
  CHECK(yw.values.rows() == 6);
  CHECK(yw.values(2, 9) == s.values(4, 2, 9));
  const auto wide = slice_spectrum(s, {Plane::xw, 3, AxisMode::frequency});
  CHECK(wide.values(5, 7) == doctest::Approx((s.values(5, 2, 7) + s.values(5, 3, 7) + s.values(5, 4, 7)) / 3.0));
  CHECK_THROWS_AS(slice_spectrum(s, {Plane::xw, 7, AxisMode::frequency}), std::invalid_argument);
  CHECK_THROWS_AS(slice_spectrum(s, {Plane::xw, 0, AxisMode::frequency}), std::invalid_argument);
}

TEST_CASE("axes: instrument coordinates and their inverse") {
  const double w0 = Wavelength::nanometers(527.5).angular_frequency();
  CHECK(wavelength_of(0.0, w0) == doctest::Approx(527.5e-9).epsilon(1e-14));
  for (double om : {-3e14, -1e13, 0.0, 2e13, 4e14}) {
    CHECK(omega_of(wavelength_of(om, w0), w0) == doctest::Approx(om).epsilon(1e-9).scale(1e3));
    for (double q : {-2e5, 0.0, 7e4}) {
      CHECK(q_of_alpha(alpha_degrees(q, om, w0), om, w0) == doctest::Approx(q).epsilon(1e-12).scale(1.0));
    }
  }
  // q = 2 pi / lambda * alpha
  CHECK(alpha_degrees(two_pi / 527.5e-9 * degrees(1.0), 0.0, w0) == doctest::Approx(1.0).epsilon(1e-12));
  auto p = plane(3, 5);
  p.values(1, 2) = 7.0;
  const auto pts = experimental_points(p, w0);
  REQUIRE(pts.size() == 15);
  CHECK(pts[7].lambda_nm == doctest::Approx(527.5));
  CHECK(pts[7].alpha_deg == 0.0);
  CHECK(pts[7].value == 7.0);
  CHECK(axis_mode_from_string(to_string(AxisMode::experimental)) == AxisMode::experimental);
}

TEST_CASE("split: empty, synthetic delta plus floor, and the 10% refusal") {
  const auto zero = split_coherent_incoherent(cube(16, 16, 16), 3);
  CHECK(zero.n_coh == 0.0);
  CHECK(zero.n_inc == 0.0);

  const double floor = 0.25, delta = 1000.0;
  auto s = cube(16, 16, 32, floor);
  s.values(8, 8, 16) += delta;
  int area = 0;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      for (int c = -3; c <= 3; ++c) area += a * a + b * b + c * c <= 9;
  const auto sp = split_coherent_incoherent(s, 3);
  CHECK(sp.n_coh == doctest::Approx(delta + floor * area));
  CHECK(sp.n_inc == doctest::Approx(floor * (16 * 16 * 32 - area)));
  CHECK(sp.coherent_peak == delta + floor);
  CHECK(sp.background_peak == floor);
  CHECK(sp.residual.values(8, 8, 16) == 0.0);
  CHECK(sp.residual.values(0, 0, 0) == floor);

  const auto clipped = split_coherent_incoherent(s, 3, 1e-4);
  CHECK(clipped.residual.values(0, 0, 0) == doctest::Approx(1e-4 * (delta + floor)));

  CHECK_THROWS_AS(split_coherent_incoherent(cube(8, 8, 8), 3), ConfigError);

  auto p = plane(32, 32);
  p.values.setConstant(1.0);
  p.values(16, 16) = 50.0;
  const auto sp2 = split_coherent_incoherent(p, 2);
  CHECK(sp2.n_coh == doctest::Approx(49.0 + 13.0));
  CHECK(sp2.n_inc == doctest::Approx(32.0 * 32.0 - 13.0));
}

TEST_CASE("ensemble split: totals and peaks") {
  auto c = cube(4, 4, 4);
  auto i = cube(4, 4, 4, 0.5);
  c.values(2, 2, 2) = 9.0;
  i.values(1, 0, 3) = 2.0;
  const auto e = ensemble_split(c, i);
  CHECK(e.n_coh == 9.0);
  CHECK(e.n_inc == doctest::Approx(0.5 * 63 + 2.0));
  CHECK(e.coherent_peak == 9.0);
  CHECK(e.incoherent_peak == 2.0);
}

TEST_CASE("centroid: symmetric ridge, argmax, scale invariance, empty rows") {
  auto p = plane(9, 64);
  const double om0 = 7.3e12;
  for (int a = 0; a < 9; ++a) {
    if (a == 2) continue;
    const double centre = om0 + 2e9 * p.first.value(a);
    for (int c = 0; c < 64; ++c) {
      const double x = (p.second.value(c) - centre) / 3e12;
      p.values(a, c) = std::exp(-x * x);
    }
  }
  const auto r = ridge_centroid(p);
  REQUIRE(r.omega_at_zero.has_value());
  CHECK(std::abs(*r.omega_at_zero - om0) < 0.1 * p.second.spacing);
  REQUIRE(r.skipped.size() == 1);
  CHECK(r.skipped[0] == 2);
  CHECK(r.q.size() == 8);
  const auto fit = ridge_slope(r, 1e9);
  CHECK(fit.slope == doctest::Approx(2e9).epsilon(1e-2));
  CHECK(fit.points == 8);

  auto scaled = p;
  scaled.values *= 37.5;
  const auto rs = ridge_centroid(scaled);
  for (std::size_t i = 0; i < r.omega.size(); ++i) CHECK(rs.omega[i] == doctest::Approx(r.omega[i]).epsilon(1e-12));

  const auto am = ridge_centroid(p, {0.1, true});
  CHECK(std::abs(*am.omega_at_zero - om0) <= 0.5 * p.second.spacing);
}

TEST_CASE("covariance tilt of a sheared Gaussian cloud") {
  auto p = plane(64, 64);
  const double slope = 3e8;
  for (int a = 0; a < 64; ++a)
    for (int c = 0; c < 64; ++c) {
      const double q = p.first.value(a), om = p.second.value(c);
      const double u = q / 8e3, v = (om - slope * q) / 4e12;
      p.values(a, c) = std::exp(-u * u - v * v);
    }
  CHECK(covariance_tilt(p) == doctest::Approx(slope).epsilon(0.02));
  p.values.setZero();
  CHECK_THROWS_AS(covariance_tilt(p), std::invalid_argument);
}

TEST_CASE("fit_line: exact line and degenerate input") {
  const auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_line({1, 1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("sweep: analytic engine is monotone, sorted and passes through the pump wavelength") {
  const auto c = default_run_config();
  std::vector<double> angles;
  for (int i = 4; i >= -4; --i) angles.push_back(degrees(0.5 * i));
  const auto r = angle_sweep(c, angles, {});
  CHECK(r.provenance == Engine::analytic);
  REQUIRE(r.rows.size() == 9);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].dtheta > r.rows[i - 1].dtheta);
    CHECK(*r.rows[i].lambda_inc < *r.rows[i - 1].lambda_inc);
  }
  CHECK(*r.rows[4].lambda_inc == doctest::Approx(527.5e-9).epsilon(1e-9));
  CHECK(*r.rows[4].slope > 0.0);
  CHECK_FALSE(r.rows[4].n_coh.has_value());
  CHECK(engine_from_string("pwpa") == Engine::pwpa);
  CHECK_THROWS_AS(engine_from_string("exact"), std::invalid_argument);
}

TEST_CASE("sweep: PWPA centroid agrees with the analytic root within 2 cells") {
  const auto c = default_run_config();
  const std::vector<double> angles = {degrees(-0.5), 0.0, degrees(0.5)};
  SweepOptions o;
  const auto an = angle_sweep(c, angles, o);
  o.engine = Engine::pwpa;
  const auto pw = angle_sweep(c, angles, o);
  const double w0 = c.context().omega0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    INFO("dtheta = " << to_degrees(angles[i]));
    REQUIRE(pw.rows[i].lambda_inc.has_value());
    CHECK(pw.rows[i].flag.empty());
    const double cells = (omega_of(*pw.rows[i].lambda_inc, w0) - omega_of(*an.rows[i].lambda_inc, w0)) / pw.domega;
    CHECK(std::abs(cells) < 2.0);
  }
  CHECK(*pw.rows[0].n_coh < 0.1 * *pw.rows[1].n_coh);
}

TEST_CASE("sweep: stochastic engine on a small grid") {
  auto c = small_config();
  c.realizations = 2;
  SweepOptions o;
  o.engine = Engine::stochastic;
  const auto r = angle_sweep(c, {0.0}, o);
  REQUIRE(r.rows.size() == 1);
  const auto& row = r.rows[0];
  REQUIRE(row.lambda_inc.has_value());
  const double cells = omega_of(*row.lambda_inc, c.context().omega0) / r.domega;
  CHECK(std::abs(cells) < 2.0);
  CHECK(*row.n_coh > 0.0);
  CHECK(*row.n_inc > 0.0);

  auto bad = c;
  bad.grid.dx = bad.grid.dy = 50e-6;
  const auto failed = angle_sweep(bad, {0.0}, o);
  CHECK_FALSE(failed.rows[0].flag.empty());
  CHECK_FALSE(failed.rows[0].lambda_inc.has_value());
}
