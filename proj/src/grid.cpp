#include "upconv/grid.hpp"

#include <stdexcept>

namespace upconv {

std::string to_string(AxisKind kind) {
  switch (kind) {
  case AxisKind::qx: return "qx";
  case AxisKind::qy: return "qy";
  case AxisKind::omega: return "omega";
  case AxisKind::alpha: return "alpha";
  case AxisKind::lambda: return "lambda";
  }
  return "?";
}

std::string to_string(Normalization n) {
  return n == Normalization::photons_per_mode ? "photons_per_mode" : "arbitrary";
}

AxisKind axis_kind_from_string(const std::string& s) {
  for (auto k : {AxisKind::qx, AxisKind::qy, AxisKind::omega, AxisKind::alpha, AxisKind::lambda}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown axis kind '" + s + "'");
}

Normalization normalization_from_string(const std::string& s) {
  if (s == "photons_per_mode") return Normalization::photons_per_mode;
  if (s == "arbitrary") return Normalization::arbitrary;
  throw std::invalid_argument("unknown normalization '" + s + "'");
}

void Spectrum2D::validate() const {
  if (values.rows() != first.size || values.cols() != second.size) {
    throw std::invalid_argument("spectrum shape does not match its axes");
  }
  if (first.spacing == 0.0 || second.spacing == 0.0) {
    throw std::invalid_argument("spectrum axes must be strictly monotone");
  }
  if ((values < 0.0).any()) throw std::invalid_argument("spectrum has negative values");
}

} // namespace upconv
