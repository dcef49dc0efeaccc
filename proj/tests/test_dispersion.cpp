#include <doctest.h>

#include <cmath>

#include "upconv/dispersion.hpp"
#include "upconv/errors.hpp"
#include "upconv/phasematch.hpp"

using namespace upconv;

namespace {

// Frozen from tests/oracles/dispersion_oracle.py (direct Sellmeier evaluation,
// finite-difference derivatives).
constexpr double kOracleN1At1055 = 1.654685281619e+00;
constexpr double kOracleNTheta23At5275 = 1.654553642216e+00;
constexpr double kOracleRho23 = 5.612116177228e-02;
constexpr double kOracleThetaPmDeg = 2.291867098597e+01;
constexpr double kOracleK1 = 9.854686492394e+06;
constexpr double kOracleK1p = 5.584971271742e-09;
constexpr double kOracleK1pp = 4.292920134766e-26;
constexpr double kOracleK0 = 1.970937298479e+07;
constexpr double kOracleK0p = 5.672725102996e-09;
constexpr double kOracleK0pp = 1.301000819225e-25;

const Wavelength kPump = Wavelength::nanometers(527.5);
const double kOmega0 = kPump.angular_frequency();
const double kOmega1 = 0.5 * kOmega0;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("ordinary index matches the oracle and shows normal dispersion") {
  const auto m = bbo();
  CHECK(rel(index_ordinary(m, Wavelength::micrometers(1.055)), kOracleN1At1055) < 1e-12);
  const double n1 = index_ordinary(m, Wavelength::micrometers(1.055));
  CHECK(n1 > 1.6);
  CHECK(n1 < 1.7);
  CHECK(index_ordinary(m, Wavelength::micrometers(0.5275)) > n1);
  CHECK_THROWS_AS(index_ordinary(m, Wavelength::micrometers(2.0)), DomainError);
  CHECK_THROWS_AS(index_ordinary(m, Wavelength::micrometers(0.3)), DomainError);
}

TEST_CASE("ordinary index decreases monotonically across the PDC band") {
  const auto m = bbo();
  double previous = index_ordinary(m, Wavelength::micrometers(0.75));
  for (double um = 0.76; um <= 1.3; um += 0.01) {
    const double n = index_ordinary(m, Wavelength::micrometers(um));
    CHECK(n < previous);
    previous = n;
  }
}

TEST_CASE("Sellmeier n^2 stays above one inside the window") {
  const auto m = bbo();
  for (double um = 0.4; um <= 1.4; um += 0.05) {
    CHECK(m.ordinary.n_squared(um) > 1.0);
    CHECK(m.extraordinary.n_squared(um) > 1.0);
  }
}

TEST_CASE("extraordinary index ellipse") {
  const auto m = bbo();
  const auto l = Wavelength::micrometers(0.5275);
  CHECK(index_extraordinary(m, 0.0, l) == index_ordinary(m, l));
  CHECK(index_extraordinary(m, pi / 2, l) == std::sqrt(m.extraordinary.n_squared(0.5275)));
  const double n23 = index_extraordinary(m, degrees(23.0), l);
  CHECK(rel(n23, kOracleNTheta23At5275) < 1e-12);
  CHECK(n23 > std::sqrt(m.extraordinary.n_squared(0.5275)));
  CHECK(n23 < index_ordinary(m, l));
  CHECK_THROWS_AS(index_extraordinary(m, -0.1, l), DomainError);
}

TEST_CASE("ordinary kz") {
  const auto m = bbo();
  const double k1 = kOmega1 / speed_of_light * index_ordinary(m, Wavelength::from_angular_frequency(kOmega1));
  CHECK(*kz_ordinary(m, kOmega1, Eigen::Vector2d::Zero(), 0.0) == doctest::Approx(k1).epsilon(1e-15));

  const double q = std::sqrt(0.99) * k1;
  CHECK(rel(*kz_ordinary(m, kOmega1, Eigen::Vector2d(q, 0.0), 0.0), k1 * 0.1) < 1e-12);

  for (double qx : {-3e5, -1e4, 0.0, 2e4, 4e5}) {
    for (double qy : {-2e5, 0.0, 7e4}) {
      for (double om : {-2e14, 0.0, 3e14}) {
        const Eigen::Vector2d v(qx, qy);
        CHECK(*kz_ordinary(m, kOmega1, v, om) == *kz_ordinary(m, kOmega1, -v, om));
      }
    }
  }

  CHECK_FALSE(kz_ordinary(m, kOmega1, Eigen::Vector2d(1.01 * k1, 0.0), 0.0).has_value());
  CHECK_THROWS_AS(kz_ordinary(m, kOmega1, Eigen::Vector2d::Zero(), -1.0e15), DomainError);
}

TEST_CASE("extraordinary kz: reference wave, slopes and symmetry") {
  const auto m = bbo();
  const double theta = degrees(23.0);
  const double k0 = kOmega0 / speed_of_light * index_extraordinary(m, theta, kPump);
  CHECK(rel(*kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d::Zero(), 0.0), k0) < 1e-14);

  const auto s = dispersion_sample(m, Polarization::extraordinary, theta, kOmega0);
  const double q_d = std::sqrt(kOracleK1 / 4e-3);
  const double hq = 1e-3 * q_d;
  const double slope_q = (*kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d(hq, 0), 0.0) -
                          *kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d(-hq, 0), 0.0)) /
                         (2 * hq);
  CHECK(rel(-slope_q, s.walkoff) < 1e-6);

  const double hw = 1e-4 * kOmega0;
  const double slope_w = (*kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d::Zero(), hw) -
                          *kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d::Zero(), -hw)) /
                         (2 * hw);
  CHECK(rel(slope_w, s.k1) < 1e-6);

  const double a = *kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d(3e4, 2e4), 1e13);
  const double b = *kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d(3e4, -2e4), 1e13);
  const double c = *kz_extraordinary(m, kOmega0, theta, Eigen::Vector2d(-3e4, 2e4), 1e13);
  CHECK(a == doctest::Approx(b).epsilon(1e-15));
  CHECK(std::abs(a - c) > 1.0);
}

TEST_CASE("dispersion samples") {
  const auto m = bbo();
  const auto o = dispersion_sample(m, Polarization::ordinary, degrees(23.0), kOmega1);
  CHECK(o.walkoff == 0.0);
  CHECK(o.k > 0.0);

  const auto e = dispersion_sample(m, Polarization::extraordinary, degrees(23.0), kOmega0);
  CHECK(rel(e.walkoff, kOracleRho23) < 1e-12);
  CHECK(e.walkoff > 0.050);
  CHECK(e.walkoff < 0.070);

  const double theta = tune_collinear(m, kPump);
  CHECK(to_degrees(theta) == doctest::Approx(kOracleThetaPmDeg).epsilon(1e-9));
  const auto o1 = dispersion_sample(m, Polarization::ordinary, theta, kOmega1);
  const auto e0 = dispersion_sample(m, Polarization::extraordinary, theta, kOmega0);
  CHECK(rel(o1.k, kOracleK1) < 1e-12);
  CHECK(rel(o1.k1, kOracleK1p) < 1e-8);
  CHECK(rel(o1.k2, kOracleK1pp) < 1e-5);
  CHECK(rel(e0.k, kOracleK0) < 1e-11);
  CHECK(rel(e0.k1, kOracleK0p) < 1e-8);
  CHECK(rel(e0.k2, kOracleK0pp) < 1e-5);
  CHECK(e0.k1 - o1.k1 > 0.0);
}

TEST_CASE("Taylor consistency of kz with the analytic samples") {
  const auto m = bbo();
  const double theta = tune_collinear(m, kPump);
  for (auto [pol, carrier] : {std::pair{Polarization::ordinary, kOmega1},
                              std::pair{Polarization::extraordinary, kOmega0}}) {
    const auto s = dispersion_sample(m, pol, theta, carrier);
    auto k = [&](double om) {
      return pol == Polarization::ordinary ? *kz_ordinary(m, carrier, Eigen::Vector2d::Zero(), om)
                                           : *kz_extraordinary(m, carrier, theta, Eigen::Vector2d::Zero(), om);
    };
    const double h = 1e-3 * carrier;
    const double d1 = (k(h) - k(-h)) / (2 * h);
    const double d2 = (k(h) - 2 * k(0) + k(-h)) / (h * h);
    CHECK(rel(d1, s.k1) < 1e-5);
    CHECK(rel(d2, s.k2) < 1e-5);
  }
}

TEST_CASE("crystal parameter invariants") {
  CrystalParams c;
  CHECK_NOTHROW(c.validate());
  c.length = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = CrystalParams{};
  c.theta = pi / 2;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = CrystalParams{};
  c.gain = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}
