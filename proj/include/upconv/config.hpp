#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "upconv/analysis.hpp"
#include "upconv/simulator.hpp"

namespace upconv {

inline constexpr const char* version = "0.1.0";

/// Physical dimension a config value must carry.
enum class UnitKind { length, time, angle, energy, angular_frequency, inverse_area, area, count, real, text, flag };

/// One documented key of the strict schema.
struct ConfigKey {
  std::string section;
  std::string key;
  UnitKind kind;
  std::string fallback;
  std::string doc;
};

/// Every accepted key with its default, in file order.
const std::vector<ConfigKey>& config_schema();

struct PlaneSettings {
  int n_q = 128;
  int n_omega = 128;
  double box_half_width = 5e14;
};

struct AnalysisSettings {
  SpectrometerView view;
  int mask_radius = 3;
  double truncate = 5e-4;
  double centroid_floor = 0.1;
};

struct SweepSettings {
  Engine engine = Engine::analytic;
  double start = degrees(-2.0);
  double step = degrees(0.5);
  double end = degrees(2.0);

  /// start, start + step, ... up to end inclusive (within half a step).
  std::vector<double> angles() const;
};

struct ConfigDocument {
  RunConfig run;
  PlaneSettings plane;
  AnalysisSettings analysis;
  SweepSettings sweep;
  /// True when [pdc] theta was "auto" and the collinear root was solved for.
  bool theta_auto = true;
  /// Sellmeier window as given, in metres; kept so the echo is stable.
  double window_min = 0.4e-6;
  double window_max = 1.4e-6;

  /// Canonical key = value text with SI units; parse_config(echo()) reproduces the document.
  std::string echo() const;
  /// FNV-1a 64 of echo().
  std::uint64_t hash() const;
  PlaneGrid plane_grid(Plane p) const;
};

/// Parses `[section]` / `key = value` text. Unknown keys, missing units and
/// unsatisfiable resolution preconditions throw ConfigError / ResolutionError
/// naming the key.
ConfigDocument parse_config(const std::string& text);

/// Reads a file; the literal path "defaults" yields the built-in document.
ConfigDocument load_config(const std::string& path);

/// Value of "<number> <unit>" in SI; throws ConfigError mentioning `where` on a bad or missing unit.
double parse_quantity(const std::string& text, UnitKind kind, const std::string& where);

std::uint64_t fnv1a64(const std::string& bytes);

} // namespace upconv
