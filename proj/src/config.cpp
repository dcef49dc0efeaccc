#include "upconv/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "upconv/errors.hpp"

namespace upconv {

namespace {

using Units = std::vector<std::pair<std::string, double>>;

/// Accepted unit symbols per kind; the first is the canonical one used by echo().
/// Sellmeier areas stay in the micrometer convention of the fit.
const Units& units_for(UnitKind kind) {
  static const Units length = {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}};
  static const Units time = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}};
  static const Units angle = {{"rad", 1.0}, {"mrad", 1e-3}, {"deg", pi / 180.0}};
  static const Units energy = {{"J", 1.0}, {"mJ", 1e-3}, {"uJ", 1e-6}, {"µJ", 1e-6}, {"nJ", 1e-9}};
  static const Units frequency = {{"rad/s", 1.0}};
  static const Units area = {{"um^2", 1.0}};
  static const Units inverse_area = {{"um^-2", 1.0}};
  static const Units none = {};
  switch (kind) {
  case UnitKind::length: return length;
  case UnitKind::time: return time;
  case UnitKind::angle: return angle;
  case UnitKind::energy: return energy;
  case UnitKind::angular_frequency: return frequency;
  case UnitKind::area: return area;
  case UnitKind::inverse_area: return inverse_area;
  default: return none;
  }
}

const char* kind_name(UnitKind kind) {
  switch (kind) {
  case UnitKind::length: return "a length (m, mm, um, nm)";
  case UnitKind::time: return "a time (s, ps, fs, ...)";
  case UnitKind::angle: return "an angle (rad, mrad, deg)";
  case UnitKind::energy: return "an energy (J, mJ, uJ, nJ)";
  case UnitKind::angular_frequency: return "an angular frequency (rad/s)";
  case UnitKind::area: return "a Sellmeier coefficient in um^2";
  case UnitKind::inverse_area: return "a Sellmeier coefficient in um^-2";
  case UnitKind::count: return "a non-negative integer";
  case UnitKind::real: return "a plain number";
  case UnitKind::text: return "a word";
  case UnitKind::flag: return "true or false";
  }
  return "?";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Leading number of `s`; `rest` receives the trimmed remainder.
bool leading_number(const std::string& s, double& value, std::string& rest) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto r = std::from_chars(first, last, value);
  if (r.ec != std::errc()) return false;
  rest = trim(std::string(r.ptr, last));
  return true;
}

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

const std::vector<ConfigKey> schema = {
    {"material", "name", UnitKind::text, "bbo", "label of the Sellmeier set"},
    {"material", "ordinary_constant", UnitKind::real, "2.7359", "n_o^2 constant term"},
    {"material", "ordinary_strength", UnitKind::area, "0.01878 um^2", "n_o^2 pole strength"},
    {"material", "ordinary_resonance", UnitKind::area, "0.01822 um^2", "n_o^2 pole position"},
    {"material", "ordinary_infrared", UnitKind::inverse_area, "0.01354 um^-2", "n_o^2 infrared term"},
    {"material", "extraordinary_constant", UnitKind::real, "2.3753", "n_e^2 constant term"},
    {"material", "extraordinary_strength", UnitKind::area, "0.01224 um^2", "n_e^2 pole strength"},
    {"material", "extraordinary_resonance", UnitKind::area, "0.01667 um^2", "n_e^2 pole position"},
    {"material", "extraordinary_infrared", UnitKind::inverse_area, "0.01516 um^-2", "n_e^2 infrared term"},
    {"material", "window_min", UnitKind::length, "0.4 um", "shortest wavelength the fit covers"},
    {"material", "window_max", UnitKind::length, "1.4 um", "longest wavelength the fit covers"},
    {"pdc", "length", UnitKind::length, "4 mm", "PDC crystal length l_c"},
    {"pdc", "theta", UnitKind::angle, "auto", "optic-axis angle; auto solves collinear degenerate matching"},
    {"pdc", "gain", UnitKind::real, "9.3", "parametric gain g"},
    {"pdc", "sigma", UnitKind::real, "1", "coupling scale of the PDC crystal"},
    {"sfg", "length", UnitKind::length, "4 mm", "SFG crystal length l_c'"},
    {"sfg", "detuning", UnitKind::angle, "0 deg", "SFG crystal rotation relative to the PDC crystal"},
    {"sfg", "sigma", UnitKind::real, "1", "coupling scale of the SFG crystal"},
    {"pump", "wavelength", UnitKind::length, "527.5 nm", "pump carrier wavelength"},
    {"pump", "waist", UnitKind::length, "500 um", "Gaussian waist w_p"},
    {"pump", "duration", UnitKind::time, "1 ps", "Gaussian duration tau_p"},
    {"pump", "energy", UnitKind::energy, "350 uJ", "pulse energy (sets the depletion scale only)"},
    {"grid", "nx", UnitKind::count, "64", "cells along x (power of two)"},
    {"grid", "ny", UnitKind::count, "64", "cells along y (power of two)"},
    {"grid", "nt", UnitKind::count, "256", "cells along t (power of two)"},
    {"grid", "dx", UnitKind::length, "100 um", "x spacing"},
    {"grid", "dy", UnitKind::length, "100 um", "y spacing"},
    {"grid", "dt", UnitKind::time, "43 fs", "t spacing"},
    {"filter", "min", UnitKind::length, "750 nm", "shortest transmitted signal wavelength"},
    {"filter", "max", UnitKind::length, "1300 nm", "longest transmitted signal wavelength"},
    {"run", "seed", UnitKind::count, "1", "master RNG seed"},
    {"run", "realizations", UnitKind::count, "1", "stochastic realizations to average"},
    {"run", "steps_pdc", UnitKind::count, "200", "z-steps in the PDC crystal (>= 100)"},
    {"run", "steps_sfg", UnitKind::count, "200", "z-steps in the SFG crystal (>= 100)"},
    {"run", "threads", UnitKind::count, "1", "worker threads"},
    {"run", "sfg_vacuum", UnitKind::flag, "false", "seed the generated harmonic with vacuum noise"},
    {"pwpa", "n_q", UnitKind::count, "128", "output plane cells along q"},
    {"pwpa", "n_omega", UnitKind::count, "128", "output plane cells along Omega"},
    {"pwpa", "box", UnitKind::angular_frequency, "5e14 rad/s", "half width of the PDC box filter"},
    {"analysis", "plane", UnitKind::text, "xw", "xw (walk-off) or yw (orthogonal)"},
    {"analysis", "slit", UnitKind::count, "1", "slit width in cells"},
    {"analysis", "axes", UnitKind::text, "frequency", "frequency or experimental export axes"},
    {"analysis", "mask_radius", UnitKind::count, "3", "coherent mask radius in cells"},
    {"analysis", "truncate", UnitKind::real, "0.0005", "display clip as a fraction of the coherent peak"},
    {"analysis", "centroid_floor", UnitKind::real, "0.1", "centroid floor as a fraction of the row maximum"},
    {"sweep", "engine", UnitKind::text, "analytic", "analytic, pwpa or stochastic"},
    {"sweep", "start", UnitKind::angle, "-2 deg", "first detuning"},
    {"sweep", "step", UnitKind::angle, "0.5 deg", "detuning step"},
    {"sweep", "end", UnitKind::angle, "2 deg", "last detuning"},
};

const ConfigKey* find_key(const std::string& section, const std::string& key) {
  for (const auto& k : schema)
    if (k.section == section && k.key == key) return &k;
  return nullptr;
}

std::string accepted_keys(const std::string& section) {
  std::string out;
  for (const auto& k : schema) {
    if (k.section != section) continue;
    if (!out.empty()) out += ", ";
    out += k.key;
  }
  return out;
}

class Values {
public:
  explicit Values(std::map<std::string, std::string> raw) : raw_(std::move(raw)) {}

  const std::string& text(const std::string& path) const { return raw_.at(path); }
  double quantity(const std::string& path) const { return parse_quantity(text(path), kind(path), path); }
  double real(const std::string& path) const { return parse_quantity(text(path), UnitKind::real, path); }
  int count(const std::string& path) const {
    const double v = parse_quantity(text(path), UnitKind::count, path);
    return static_cast<int>(v);
  }
  bool flag(const std::string& path) const {
    const auto& t = text(path);
    if (t == "true") return true;
    if (t == "false") return false;
    throw ConfigError(fmt::format("{} = '{}': expected true or false", path, t));
  }

private:
  static UnitKind kind(const std::string& path) {
    const auto dot = path.find('.');
    return find_key(path.substr(0, dot), path.substr(dot + 1))->kind;
  }
  std::map<std::string, std::string> raw_;
};

SellmeierSet sellmeier(const Values& v, const std::string& pol) {
  SellmeierSet s;
  s.constant = v.real("material." + pol + "_constant");
  s.poles = {{v.quantity("material." + pol + "_strength"), v.quantity("material." + pol + "_resonance")}};
  s.infrared = v.quantity("material." + pol + "_infrared");
  s.lambda_min_um = v.quantity("material.window_min") * 1e6;
  s.lambda_max_um = v.quantity("material.window_max") * 1e6;
  return s;
}

std::string canonical(UnitKind kind, double value) {
  switch (kind) {
  case UnitKind::count: return fmt::format("{}", static_cast<long long>(value));
  case UnitKind::real: return fmt_real(value);
  default: return fmt_real(value) + " " + units_for(kind).front().first;
  }
}

template <typename T>
std::string enum_text(T v) {
  return to_string(v);
}

} // namespace

const std::vector<ConfigKey>& config_schema() { return schema; }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double parse_quantity(const std::string& text, UnitKind kind, const std::string& where) {
  const auto t = trim(text);
  double value = 0.0;
  std::string unit;
  if (!leading_number(t, value, unit) || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{} = '{}': expected {}", where, text, kind_name(kind)));
  }
  const auto& units = units_for(kind);
  if (units.empty()) {
    if (!unit.empty()) throw ConfigError(fmt::format("{} = '{}': {} takes no unit", where, text, where));
    if (kind == UnitKind::count && (value < 0.0 || value != std::floor(value) || value > 2147483647.0)) {
      throw ConfigError(fmt::format("{} = '{}': expected {}", where, text, kind_name(kind)));
    }
    return value;
  }
  if (unit.empty()) {
    throw ConfigError(fmt::format("{} = '{}': missing unit, expected {} such as '{} {}'", where, text,
                                  kind_name(kind), t, units.front().first));
  }
  for (const auto& [symbol, factor] : units) {
    if (symbol == unit) return value * factor;
  }
  throw ConfigError(fmt::format("{} = '{}': unknown unit '{}', expected {}", where, text, unit, kind_name(kind)));
}

std::vector<double> SweepSettings::angles() const {
  if (!(step > 0.0)) throw ConfigError("sweep.step must be positive");
  if (end < start) throw ConfigError("sweep.end must not be below sweep.start");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((end - start) / step + 0.5));
  for (long i = 0; i <= n; ++i) out.push_back(start + i * step);
  return out;
}

PlaneGrid ConfigDocument::plane_grid(Plane p) const {
  const auto ctx = run.context();
  auto g = default_plane_grid(ctx, p);
  g.n_q = plane.n_q;
  g.n_omega = plane.n_omega;
  g.box_half_width = plane.box_half_width;
  // integration extent follows the box; recompute with the configured width
  auto sized = default_plane_grid(ctx, p);
  const double box = effective_box(ctx, plane.box_half_width);
  g.n_omega_int = std::max(g.n_omega, 2 * static_cast<int>(std::ceil(box / sized.domega)) + 2);
  g.n_q_int = std::max(g.n_q, sized.n_q_int);
  return g;
}

ConfigDocument parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  std::map<std::string, std::string> raw;
  for (const auto& k : schema) raw[k.section + "." + k.key] = k.fallback;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(fmt::format("key '{}' outside a [section]", section));
    }
    bool known_section = false;
    for (const auto& k : schema) known_section |= k.section == section;
    if (!known_section) {
      throw ConfigError(fmt::format("unknown section [{}]; sections are material, pdc, sfg, pump, grid, filter, "
                                    "run, pwpa, analysis, sweep",
                                    section));
    }
    for (const auto& [key, value] : body) {
      if (!find_key(section, key)) {
        throw ConfigError(
            fmt::format("unknown key {}.{}; accepted keys in [{}]: {}", section, key, section, accepted_keys(section)));
      }
      raw[section + "." + key] = trim(value.data());
    }
  }
  const Values v(raw);

  ConfigDocument doc;
  Material m;
  m.name = v.text("material.name");
  m.ordinary = sellmeier(v, "ordinary");
  m.extraordinary = sellmeier(v, "extraordinary");
  doc.window_min = v.quantity("material.window_min");
  doc.window_max = v.quantity("material.window_max");

  auto& r = doc.run;
  r.pump.carrier = Wavelength::meters(v.quantity("pump.wavelength"));
  r.pump.waist = v.quantity("pump.waist");
  r.pump.duration = v.quantity("pump.duration");
  r.pump.energy = v.quantity("pump.energy");

  r.pdc.material = m;
  r.pdc.length = v.quantity("pdc.length");
  r.pdc.gain = v.real("pdc.gain");
  r.pdc.sigma = v.real("pdc.sigma");
  doc.theta_auto = v.text("pdc.theta") == "auto";
  try {
    r.pdc.theta = doc.theta_auto ? tune_collinear(m, r.pump.carrier) : v.quantity("pdc.theta");
  } catch (const std::domain_error& e) {
    throw ConfigError(fmt::format("pdc.theta: {}", e.what()));
  }
  r.sfg = r.pdc;
  r.sfg.length = v.quantity("sfg.length");
  r.sfg.sigma = v.real("sfg.sigma");
  r.sfg.gain = 0.0;
  r.dtheta = v.quantity("sfg.detuning");

  r.grid.nx = v.count("grid.nx");
  r.grid.ny = v.count("grid.ny");
  r.grid.nt = v.count("grid.nt");
  r.grid.dx = v.quantity("grid.dx");
  r.grid.dy = v.quantity("grid.dy");
  r.grid.dt = v.quantity("grid.dt");
  r.filter_min = v.quantity("filter.min");
  r.filter_max = v.quantity("filter.max");
  r.seed = static_cast<std::uint64_t>(v.count("run.seed"));
  r.realizations = v.count("run.realizations");
  r.steps_pdc = v.count("run.steps_pdc");
  r.steps_sfg = v.count("run.steps_sfg");
  r.threads = std::max(1, v.count("run.threads"));
  r.seed_sfg_vacuum = v.flag("run.sfg_vacuum");

  doc.plane.n_q = v.count("pwpa.n_q");
  doc.plane.n_omega = v.count("pwpa.n_omega");
  doc.plane.box_half_width = v.quantity("pwpa.box");

  auto& a = doc.analysis;
  try {
    a.view.plane = plane_from_string(v.text("analysis.plane"));
    a.view.axes = axis_mode_from_string(v.text("analysis.axes"));
    doc.sweep.engine = engine_from_string(v.text("sweep.engine"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  a.view.slit = v.count("analysis.slit");
  a.mask_radius = v.count("analysis.mask_radius");
  a.truncate = v.real("analysis.truncate");
  a.centroid_floor = v.real("analysis.centroid_floor");
  doc.sweep.start = v.quantity("sweep.start");
  doc.sweep.step = v.quantity("sweep.step");
  doc.sweep.end = v.quantity("sweep.end");

  try {
    a.view.validate();
    r.pdc.validate();
    r.sfg.validate();
    doc.sweep.angles();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  if (doc.plane.n_q < 2 || doc.plane.n_omega < 2) throw ConfigError("pwpa.n_q and pwpa.n_omega must be at least 2");
  // cross-module checks: grid resolution against the configured crystals
  r.validate();
  return doc;
}

ConfigDocument load_config(const std::string& path) {
  if (path == "defaults") return parse_config("");
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string ConfigDocument::echo() const {
  const auto& r = run;
  const auto& m = r.pdc.material;
  std::map<std::string, std::string> out;
  auto put = [&](const std::string& path, UnitKind kind, double value) { out[path] = canonical(kind, value); };
  out["material.name"] = m.name;
  for (const auto& [pol, s] : {std::pair<std::string, const SellmeierSet*>{"ordinary", &m.ordinary},
                               {"extraordinary", &m.extraordinary}}) {
    put("material." + pol + "_constant", UnitKind::real, s->constant);
    put("material." + pol + "_strength", UnitKind::area, s->poles.at(0).strength);
    put("material." + pol + "_resonance", UnitKind::area, s->poles.at(0).resonance);
    put("material." + pol + "_infrared", UnitKind::inverse_area, s->infrared);
  }
  put("material.window_min", UnitKind::length, window_min);
  put("material.window_max", UnitKind::length, window_max);
  put("pdc.length", UnitKind::length, r.pdc.length);
  out["pdc.theta"] = theta_auto ? "auto" : canonical(UnitKind::angle, r.pdc.theta);
  put("pdc.gain", UnitKind::real, r.pdc.gain);
  put("pdc.sigma", UnitKind::real, r.pdc.sigma);
  put("sfg.length", UnitKind::length, r.sfg.length);
  put("sfg.detuning", UnitKind::angle, r.dtheta);
  put("sfg.sigma", UnitKind::real, r.sfg.sigma);
  put("pump.wavelength", UnitKind::length, r.pump.carrier.in_meters());
  put("pump.waist", UnitKind::length, r.pump.waist);
  put("pump.duration", UnitKind::time, r.pump.duration);
  put("pump.energy", UnitKind::energy, r.pump.energy);
  put("grid.nx", UnitKind::count, r.grid.nx);
  put("grid.ny", UnitKind::count, r.grid.ny);
  put("grid.nt", UnitKind::count, r.grid.nt);
  put("grid.dx", UnitKind::length, r.grid.dx);
  put("grid.dy", UnitKind::length, r.grid.dy);
  put("grid.dt", UnitKind::time, r.grid.dt);
  put("filter.min", UnitKind::length, r.filter_min);
  put("filter.max", UnitKind::length, r.filter_max);
  put("run.seed", UnitKind::count, static_cast<double>(r.seed));
  put("run.realizations", UnitKind::count, r.realizations);
  put("run.steps_pdc", UnitKind::count, r.steps_pdc);
  put("run.steps_sfg", UnitKind::count, r.steps_sfg);
  put("run.threads", UnitKind::count, r.threads);
  out["run.sfg_vacuum"] = r.seed_sfg_vacuum ? "true" : "false";
  put("pwpa.n_q", UnitKind::count, plane.n_q);
  put("pwpa.n_omega", UnitKind::count, plane.n_omega);
  put("pwpa.box", UnitKind::angular_frequency, plane.box_half_width);
  out["analysis.plane"] = enum_text(analysis.view.plane);
  put("analysis.slit", UnitKind::count, analysis.view.slit);
  out["analysis.axes"] = enum_text(analysis.view.axes);
  put("analysis.mask_radius", UnitKind::count, analysis.mask_radius);
  put("analysis.truncate", UnitKind::real, analysis.truncate);
  put("analysis.centroid_floor", UnitKind::real, analysis.centroid_floor);
  out["sweep.engine"] = enum_text(sweep.engine);
  put("sweep.start", UnitKind::angle, sweep.start);
  put("sweep.step", UnitKind::angle, sweep.step);
  put("sweep.end", UnitKind::angle, sweep.end);

  std::string text;
  std::string section;
  for (const auto& k : schema) {
    if (k.section != section) {
      if (!section.empty()) text += "\n";
      section = k.section;
      text += "[" + section + "]\n";
    }
    text += k.key + " = " + out.at(k.section + "." + k.key) + "\n";
  }
  return text;
}

std::uint64_t ConfigDocument::hash() const { return fnv1a64(echo()); }

} // namespace upconv
