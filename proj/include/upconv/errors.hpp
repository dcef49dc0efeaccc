#pragma once

#include <stdexcept>
#include <string>

namespace upconv {

/// Wavelength outside a Sellmeier validity window, or an angle outside its
/// admissible range.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A mode with k^2 <= q^2: no real longitudinal wavevector.
class EvanescentMode : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Grid spacing too coarse for the scales set by the crystals.
class ResolutionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration; the message names the key.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical blow-up inside a propagation loop.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace upconv
