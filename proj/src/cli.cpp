#include "upconv/cli.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "upconv/config.hpp"
#include "upconv/errors.hpp"
#include "upconv/io.hpp"

namespace upconv {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config = "defaults";
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> plane;
  std::optional<std::string> engine;
  std::optional<std::string> angles;
  std::optional<double> truncate;
  std::string input;
};

class Session {
public:
  Session(const Options& o, std::string command, std::ostream& out)
      : out_(out), start_(std::chrono::steady_clock::now()) {
    doc_ = load_config(o.config);
    if (o.seed) doc_.run.seed = *o.seed;
    if (o.threads) doc_.run.threads = std::max(1, *o.threads);
    if (o.plane) doc_.analysis.view.plane = plane_from_string(*o.plane);
    if (o.truncate) {
      if (!(*o.truncate >= 0.0)) throw ConfigError("--truncate must be non-negative");
      doc_.analysis.truncate = *o.truncate;
    }
    if (o.engine) doc_.sweep.engine = engine_from_string(*o.engine);
    if (o.angles) {
      const auto range = parse_angle_settings(*o.angles);
      doc_.sweep.start = range.start;
      doc_.sweep.step = range.step;
      doc_.sweep.end = range.end;
    }
    manifest_.command = std::move(command);
    manifest_.config_echo = doc_.echo();
    manifest_.config_hash = doc_.hash();
    manifest_.seed = doc_.run.seed;
    // concurrent runs without --out land in distinct directories
    dir_ = o.out ? fs::path(*o.out) : fs::path("upconv-out") / fmt::format("{}-{:016x}", command_name(manifest_.command),
                                                                           manifest_.config_hash);
  }

  ConfigDocument& doc() { return doc_; }
  GridMeta meta() const { return {doc_.run.seed, manifest_.config_hash, doc_.run.context().omega0}; }

  void text(const std::string& name, const std::string& kind, const std::string& body) {
    const auto path = (dir_ / name).string();
    write_text(path, body);
    manifest_.outputs.push_back({name, kind});
  }
  void grid(const std::string& name, const std::string& kind, const GridFile& file) {
    write_grid((dir_ / name).string(), file);
    manifest_.outputs.push_back({name, kind});
  }
  void note(const std::string& key, const std::string& value) { manifest_.notes.emplace_back(key, value); }

  void finish() {
    manifest_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text((dir_ / "manifest.json").string(), manifest_json(manifest_));
    out_ << fmt::format("wrote {} file(s) and manifest.json to {}\n", manifest_.outputs.size(), dir_.string());
  }

private:
  static std::string command_name(const std::string& line) {
    const auto a = line.find(' ');
    const auto b = line.find(' ', a + 1);
    return a == std::string::npos ? line : line.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1);
  }

  fs::path dir_;
  std::ostream& out_;
  std::chrono::steady_clock::time_point start_;
  ConfigDocument doc_;
  Manifest manifest_;
};

std::string quantity_rows(const std::vector<std::tuple<std::string, double, std::string>>& rows) {
  std::string s = "quantity,value,unit\n";
  for (const auto& [name, value, unit] : rows) s += name + "," + format_number(value) + "," + unit + "\n";
  return s;
}

void run_phasematch(Session& s, std::ostream& out) {
  const auto ctx = s.doc().run.context();
  const double g = s.doc().run.pdc.gain;
  const auto b = bandwidths(ctx);
  const auto t = threshold_lengths(ctx);
  const auto csv = quantity_rows({
      {"theta_pdc", to_degrees(ctx.pdc.theta), "deg"},
      {"omega_d", b.omega_d, "rad/s"},
      {"q_d", b.q_d, "1/m"},
      {"omega_gvm", b.omega_gvm, "rad/s"},
      {"q_sw", b.q_sw, "1/m"},
      {"l_sw", t.walkoff, "m"},
      {"l_gvm", t.gvm, "m"},
      {"dtheta_c", to_degrees(critical_angle(ctx, g)), "deg"},
      {"dlambda_inc_dtheta", lambda_inc_linear_slope(ctx) * 1e9 * degrees(1.0), "nm/deg"},
  });
  s.text("phasematch.csv", "phasematch scalars", csv);
  out << csv;
}

void run_pwpa_spectrum(Session& s) {
  auto& doc = s.doc();
  const auto ctx = doc.run.context();
  const double g = doc.run.pdc.gain;
  const Plane plane = doc.analysis.view.plane;
  const auto grid = doc.plane_grid(plane);
  const auto full = incoherent_spectrum_full(ctx, g, grid, doc.run.threads);
  const auto fact = incoherent_spectrum_factorized(ctx, g, grid);
  const auto tag = to_string(plane);
  const auto mode = doc.analysis.view.axes;
  s.grid("pwpa_full_" + tag + ".grid", "PWPA incoherent spectrum (full integral)", to_grid_file(full, s.meta()));
  s.text("pwpa_full_" + tag + ".csv", "PWPA incoherent spectrum (full integral)", slice_csv(full, mode, ctx.omega0));
  s.text("pwpa_factorized_" + tag + ".csv", "PWPA incoherent spectrum (factorized)",
         slice_csv(fact, mode, ctx.omega0));
  const auto c = ridge_centroid(full, {doc.analysis.centroid_floor, false});
  std::vector<std::tuple<std::string, double, std::string>> rows = {
      {"covariance_tilt", covariance_tilt(full), "rad/s/m^-1"},
      {"predicted_slope", ctx.extraordinary_sfg.walkoff / (ctx.extraordinary_sfg.k1 - ctx.ordinary_sfg.k1),
       "rad/s/m^-1"},
  };
  try {
    rows.emplace_back("ridge_slope", ridge_slope(c, 2.0 * bandwidths(ctx).q_sw).slope, "rad/s/m^-1");
  } catch (const std::invalid_argument&) {
  }
  if (c.omega_at_zero) rows.emplace_back("lambda_inc", wavelength_of(*c.omega_at_zero, ctx.omega0) * 1e9, "nm");
  s.text("pwpa_summary_" + tag + ".csv", "ridge summary", quantity_rows(rows));
}

void run_simulate(Session& s) {
  auto& doc = s.doc();
  const auto result = run_experiment(doc.run);
  const auto ctx = doc.run.context();
  const auto& sfg = result.sfg.front();
  const auto view = doc.analysis.view;
  const auto tag = to_string(view.plane);
  s.grid("sfg.grid", "SFG far field, realization mean", to_grid_file(sfg, s.meta()));
  s.grid("pdc.grid", "PDC far field, realization mean, vacuum-corrected", to_grid_file(result.pdc, s.meta()));
  s.text("sfg_" + tag + ".csv", "SFG slice", slice_csv(slice_spectrum(sfg, view), view.axes, ctx.omega0));
  const auto split = split_coherent_incoherent(sfg, doc.analysis.mask_radius, doc.analysis.truncate);
  s.text("sfg_" + tag + "_residual.csv", "SFG slice outside the coherent mask, clipped for display",
         slice_csv(slice_spectrum(split.residual, view), view.axes, ctx.omega0));
  std::vector<std::tuple<std::string, double, std::string>> rows = {
      {"n_coh_mask", split.n_coh, "photons"},
      {"n_inc_mask", split.n_inc, "photons"},
      {"coherent_peak", split.coherent_peak, "photons/mode"},
      {"background_peak", split.background_peak, "photons/mode"},
      {"seconds", result.seconds, "s"},
  };
  Spectrum3D incoherent = split.residual;
  if (!result.sfg_incoherent.empty()) {
    const auto e = ensemble_split(result.sfg_coherent.front(), result.sfg_incoherent.front());
    rows.emplace_back("n_coh_ensemble", e.n_coh, "photons");
    rows.emplace_back("n_inc_ensemble", e.n_inc, "photons");
    rows.emplace_back("coherent_peak_ensemble", e.coherent_peak, "photons/mode");
    rows.emplace_back("incoherent_peak_ensemble", e.incoherent_peak, "photons/mode");
    incoherent = result.sfg_incoherent.front();
    s.grid("sfg_incoherent.grid", "SFG ensemble variance", to_grid_file(incoherent, s.meta()));
  }
  const auto c = ridge_centroid(slice_spectrum(incoherent, {Plane::xw, view.slit, view.axes}),
                                {doc.analysis.centroid_floor, false});
  if (c.omega_at_zero) rows.emplace_back("lambda_inc", wavelength_of(*c.omega_at_zero, ctx.omega0) * 1e9, "nm");
  s.text("summary.csv", "scalar summaries", quantity_rows(rows));
  s.note("ordering", doc.run.seed_sfg_vacuum ? "SFG densities have the 1/2 vacuum term removed"
                                             : "SFG input harmonic is empty; densities need no ordering correction");
  s.note("realizations", std::to_string(doc.run.realizations));
}

void run_analyze(Session& s, const std::string& input) {
  auto& doc = s.doc();
  const auto file = read_grid(input);
  const auto spectrum = spectrum3d_from(file);
  const double carrier = file.header.carrier;
  const auto view = doc.analysis.view;
  const auto tag = to_string(view.plane);
  const auto slice = slice_spectrum(spectrum, view);
  s.text("slice_" + tag + ".csv", "slice", slice_csv(slice, view.axes, carrier));
  const auto split = split_coherent_incoherent(spectrum, doc.analysis.mask_radius, doc.analysis.truncate);
  const auto residual = slice_spectrum(split.residual, view);
  s.text("residual_" + tag + ".csv", "slice outside the coherent mask, clipped", slice_csv(residual, view.axes, carrier));
  const auto c = ridge_centroid(slice_spectrum(split.residual, view), {doc.analysis.centroid_floor, false});
  std::string cen = "q_per_m,omega_rad_per_s,lambda_nm\n";
  for (std::size_t i = 0; i < c.q.size(); ++i) {
    cen += format_number(c.q[i]) + "," + format_number(c.omega[i]) + "," +
           format_number(wavelength_of(c.omega[i], carrier) * 1e9) + "\n";
  }
  s.text("centroids_" + tag + ".csv", "ridge centroids", cen);
  std::vector<std::tuple<std::string, double, std::string>> rows = {
      {"n_coh", split.n_coh, "photons"},
      {"n_inc", split.n_inc, "photons"},
      {"coherent_peak", split.coherent_peak, "photons/mode"},
      {"background_peak", split.background_peak, "photons/mode"},
      {"skipped_rows", static_cast<double>(c.skipped.size()), "rows"},
  };
  if (c.omega_at_zero) rows.emplace_back("lambda_inc", wavelength_of(*c.omega_at_zero, carrier) * 1e9, "nm");
  s.text("analysis_summary.csv", "scalar summaries", quantity_rows(rows));
  s.note("input", input);
  s.note("input_config_hash", fmt::format("{:016x}", file.header.config_hash));
}

void run_sweep(Session& s) {
  auto& doc = s.doc();
  const auto list = doc.sweep.angles();
  SweepOptions o;
  o.engine = doc.sweep.engine;
  o.centroid = {doc.analysis.centroid_floor, false};
  o.mask_radius = doc.analysis.mask_radius;
  o.threads = doc.run.threads;
  const auto result = angle_sweep(doc.run, list, o);
  s.text("sweep.csv", "angle sweep", sweep_csv(result));
  s.note("engine", to_string(result.provenance));
  s.note("domega", format_number(result.domega));
}

} // namespace

SweepSettings parse_angle_settings(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("--angles '{}': expected START:STEP:END in degrees", text));
    }
  }
  if (parts.size() != 3) throw ConfigError(fmt::format("--angles '{}': expected START:STEP:END in degrees", text));
  SweepSettings sw;
  sw.start = degrees(parts[0]);
  sw.step = degrees(parts[1]);
  sw.end = degrees(parts[2]);
  sw.angles();
  return sw;
}

std::vector<double> parse_angle_range(const std::string& text) { return parse_angle_settings(text).angles(); }

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cascaded PDC -> SFG spectra: phase matching, plane-wave pump model, stochastic simulation.", "upconv"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "config file, or 'defaults' for the built-in document")
        ->capture_default_str();
    sub->add_option("--out", o.out, "output directory (default upconv-out/<command>-<config hash>)");
    sub->add_option("--seed", o.seed, "override run.seed");
    sub->add_option("--threads", o.threads, "override run.threads");
  };
  auto* pm = app.add_subcommand("phasematch", "bandwidths, threshold lengths, critical angle");
  common(pm);
  auto* pw = app.add_subcommand("pwpa-spectrum", "plane-wave pump incoherent SFG spectrum on one plane");
  common(pw);
  pw->add_option("--plane", o.plane, "xw (walk-off plane) or yw (orthogonal plane)")
      ->check(CLI::IsMember({"xw", "yw"}));
  auto* sim = app.add_subcommand("simulate", "stochastic PDC -> imaging -> SFG run");
  common(sim);
  sim->add_option("--plane", o.plane, "slice plane: xw or yw")->check(CLI::IsMember({"xw", "yw"}));
  sim->add_option("--truncate", o.truncate, "display clip of the residual as a fraction of the coherent peak");
  auto* an = app.add_subcommand("analyze", "slice, split and centroid a spectrum grid file");
  common(an);
  an->add_option("input", o.input, "spectrum grid file written by simulate")->required();
  an->add_option("--plane", o.plane, "slice plane: xw or yw")->check(CLI::IsMember({"xw", "yw"}));
  an->add_option("--truncate", o.truncate, "display clip of the residual as a fraction of the coherent peak");
  auto* sw = app.add_subcommand("sweep", "lambda_inc and photon numbers versus SFG crystal detuning");
  common(sw);
  sw->add_option("--engine", o.engine, "analytic, pwpa or stochastic")
      ->check(CLI::IsMember({"analytic", "pwpa", "stochastic"}));
  sw->add_option("--angles", o.angles, "START:STEP:END in degrees, e.g. -2:0.5:2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  auto* chosen = app.get_subcommands().front();
  try {
    std::string line;
    for (int i = 0; i < argc; ++i) line += (i ? " " : "") + std::string(argv[i]);
    Session s(o, line, out);
    const auto name = chosen->get_name();
    if (name == "phasematch") run_phasematch(s, out);
    else if (name == "pwpa-spectrum") run_pwpa_spectrum(s);
    else if (name == "simulate") run_simulate(s);
    else if (name == "analyze") run_analyze(s, o.input);
    else if (name == "sweep") run_sweep(s);
    s.finish();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace upconv
