#include "upconv/dispersion.hpp"

#include <cmath>
#include <fmt/format.h>
#include <sstream>

#include "upconv/errors.hpp"

namespace upconv {

namespace {

std::string describe(Wavelength lambda, const SellmeierSet& set) {
  std::ostringstream os;
  os << "wavelength " << lambda.in_micrometers() << " um outside Sellmeier window ["
     << set.lambda_min_um << ", " << set.lambda_max_um << "] um";
  return os.str();
}

void require_window(const SellmeierSet& set, Wavelength lambda) {
  if (!set.contains(lambda)) {
    throw DomainError(describe(lambda, set));
  }
}

/// n^2(theta, lambda) for the extraordinary wave and its lambda-derivatives.
SellmeierSet::Derivatives ellipse_derivatives(const Material& material, double theta, double lambda_um) {
  const auto o = material.ordinary.n_squared_derivatives(lambda_um);
  const auto e = material.extraordinary.n_squared_derivatives(lambda_um);
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);

  // h = 1/n^2 = c2/fo + s2/fe
  const double h = c2 / o.value + s2 / e.value;
  const double h1 = -c2 * o.first / (o.value * o.value) - s2 * e.first / (e.value * e.value);
  const double h2 = c2 * (2.0 * o.first * o.first / std::pow(o.value, 3) - o.second / (o.value * o.value)) +
                    s2 * (2.0 * e.first * e.first / std::pow(e.value, 3) - e.second / (e.value * e.value));
  return {1.0 / h, -h1 / (h * h), 2.0 * h1 * h1 / (h * h * h) - h2 / (h * h)};
}

} // namespace

bool SellmeierSet::contains(Wavelength lambda) const {
  const double um = lambda.in_micrometers();
  return um >= lambda_min_um && um <= lambda_max_um;
}

double SellmeierSet::n_squared(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double n2 = constant - infrared * l2;
  for (const auto& p : poles) {
    n2 += p.strength / (l2 - p.resonance);
  }
  return n2;
}

SellmeierSet::Derivatives SellmeierSet::n_squared_derivatives(double lambda_um) const {
  const double l = lambda_um;
  const double l2 = l * l;
  Derivatives d{n_squared(l), -2.0 * infrared * l, -2.0 * infrared};
  for (const auto& p : poles) {
    const double den = l2 - p.resonance;
    d.first += -2.0 * p.strength * l / (den * den);
    d.second += p.strength * (8.0 * l2 - 2.0 * den) / (den * den * den);
  }
  return d;
}

Material bbo() {
  Material m;
  m.name = "BBO";
  m.ordinary = SellmeierSet{2.7359, {{0.01878, 0.01822}}, 0.01354, 0.4, 1.4};
  m.extraordinary = SellmeierSet{2.3753, {{0.01224, 0.01667}}, 0.01516, 0.4, 1.4};
  return m;
}

void CrystalParams::validate() const {
  if (!(length > 0.0)) {
    throw DomainError(fmt::format("crystal length must be positive, got {} m", length));
  }
  if (!(theta > 0.0 && theta < pi / 2)) {
    throw DomainError(fmt::format("crystal angle must lie in (0, pi/2), got {} rad", theta));
  }
  if (!(sigma >= 0.0)) {
    throw DomainError(fmt::format("coupling sigma must be non-negative, got {}", sigma));
  }
  if (!(gain >= 0.0)) {
    throw DomainError(fmt::format("parametric gain must be non-negative, got {}", gain));
  }
}

double index_ordinary(const Material& material, Wavelength lambda) {
  require_window(material.ordinary, lambda);
  return std::sqrt(material.ordinary.n_squared(lambda.in_micrometers()));
}

double index_extraordinary(const Material& material, double theta, Wavelength lambda) {
  if (!(theta >= 0.0 && theta <= pi / 2)) {
    throw DomainError(fmt::format("propagation angle must lie in [0, pi/2], got {} rad", theta));
  }
  require_window(material.ordinary, lambda);
  require_window(material.extraordinary, lambda);
  const double um = lambda.in_micrometers();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double no2 = material.ordinary.n_squared(um);
  const double ne2 = material.extraordinary.n_squared(um);
  // Exact endpoints: avoid cos(pi/2) != 0 round-off.
  if (theta == 0.0) return std::sqrt(no2);
  if (theta == pi / 2) return std::sqrt(ne2);
  return 1.0 / std::sqrt(c * c / no2 + s * s / ne2);
}

std::optional<double> try_wavenumber(const Material& material, Polarization pol, double theta,
                                     double omega) {
  const auto lambda = Wavelength::from_angular_frequency(omega);
  if (!material.ordinary.contains(lambda)) return std::nullopt;
  const double um = lambda.in_micrometers();
  if (pol == Polarization::ordinary) {
    return omega / speed_of_light * std::sqrt(material.ordinary.n_squared(um));
  }
  if (!material.extraordinary.contains(lambda)) return std::nullopt;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double inv = c * c / material.ordinary.n_squared(um) + s * s / material.extraordinary.n_squared(um);
  return omega / speed_of_light / std::sqrt(inv);
}

std::optional<double> ellipsoid_kz(double wavenumber, double inv_no2, double inv_ne2, double theta,
                                   double qx, double qy) {
  const double s = -std::sin(theta);
  const double c = std::cos(theta);
  const double d = inv_no2 - inv_ne2;
  const double a = c * c * d + inv_ne2;
  const double b = 2.0 * qx * s * c * d;
  const double cc = qx * qx * s * s * d + (qx * qx + qy * qy) * inv_ne2 - wavenumber * wavenumber;
  const double disc = b * b - 4.0 * a * cc;
  if (!(disc > 0.0)) return std::nullopt;
  // Numerically stable root of a kz^2 + b kz + cc = 0 with cc < 0.
  const double sq = std::sqrt(disc);
  const double kz = b <= 0.0 ? (-b + sq) / (2.0 * a) : (-2.0 * cc) / (b + sq);
  if (!(kz > 0.0)) return std::nullopt;
  return kz;
}

std::optional<double> kz_ordinary(const Material& material, double carrier, const Eigen::Vector2d& q,
                                  double omega) {
  const double w = carrier + omega;
  const auto lambda = Wavelength::from_angular_frequency(w);
  require_window(material.ordinary, lambda);
  const double k = w / speed_of_light * std::sqrt(material.ordinary.n_squared(lambda.in_micrometers()));
  const double r = k * k - q.squaredNorm();
  if (!(r > 0.0)) return std::nullopt;
  return std::sqrt(r);
}

std::optional<double> kz_extraordinary(const Material& material, double carrier, double theta,
                                       const Eigen::Vector2d& q, double omega) {
  const double w = carrier + omega;
  const auto lambda = Wavelength::from_angular_frequency(w);
  require_window(material.ordinary, lambda);
  require_window(material.extraordinary, lambda);
  const double um = lambda.in_micrometers();
  return ellipsoid_kz(w / speed_of_light, 1.0 / material.ordinary.n_squared(um),
                      1.0 / material.extraordinary.n_squared(um), theta, q.x(), q.y());
}

DispersionSample dispersion_sample(const Material& material, Polarization pol, double theta,
                                   double carrier) {
  const auto lambda = Wavelength::from_angular_frequency(carrier);
  require_window(material.ordinary, lambda);
  const double um = lambda.in_micrometers();

  SellmeierSet::Derivatives f;
  if (pol == Polarization::ordinary) {
    f = material.ordinary.n_squared_derivatives(um);
  } else {
    require_window(material.extraordinary, lambda);
    f = ellipse_derivatives(material, theta, um);
  }

  // n(lambda) and its derivatives per meter.
  const double n = std::sqrt(f.value);
  const double n1 = f.first / (2.0 * n) * 1e6;
  const double n2 = (f.second / (2.0 * n) - f.first * f.first / (4.0 * n * n * n)) * 1e12;
  const double lm = lambda.in_meters();

  DispersionSample s;
  s.k = carrier * n / speed_of_light;
  s.k1 = (n - lm * n1) / speed_of_light;
  s.k2 = lm * lm * lm * n2 / (two_pi * speed_of_light * speed_of_light);
  if (pol == Polarization::extraordinary) {
    const double no2 = material.ordinary.n_squared(um);
    const double ne2 = material.extraordinary.n_squared(um);
    s.walkoff = 0.5 * f.value * (1.0 / ne2 - 1.0 / no2) * std::sin(2.0 * theta);
  }
  return s;
}

} // namespace upconv
