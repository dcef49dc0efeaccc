#include "upconv/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "upconv/config.hpp"

namespace upconv {

namespace {

constexpr char magic[8] = {'U', 'P', 'C', 'V', 'G', 'R', 'I', 'D'};
constexpr std::uint32_t byte_order_mark = 0x01020304;
constexpr std::uint32_t current_version = 1;

static_assert(std::endian::native == std::endian::little, "grid files are written on little-endian hosts only");

class Writer {
public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  }
  template <typename T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error(fmt::format("write to '{}' failed", path_));
  }

private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  }
  template <typename T>
  T get(const char* what) {
    T v;
    bytes(&v, sizeof(T), what);
    return v;
  }
  void bytes(void* p, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw std::runtime_error(fmt::format("'{}' is truncated while reading the {}", path_, what));
    }
  }

private:
  std::ifstream in_;
  std::string path_;
};

void write_header(Writer& w, const GridHeader& h) {
  w.bytes(magic, sizeof magic);
  w.put(byte_order_mark);
  w.put(h.version);
  w.put(static_cast<std::uint8_t>(h.payload));
  w.put(static_cast<std::uint8_t>(h.order));
  w.put(static_cast<std::uint8_t>(h.polarization));
  w.put(static_cast<std::uint8_t>(h.normalization));
  w.put(static_cast<std::uint32_t>(h.axes.size()));
  for (const auto& a : h.axes) {
    w.put(static_cast<std::uint8_t>(a.kind));
    w.put(static_cast<std::int32_t>(a.size));
    w.put(a.offset);
    w.put(a.spacing);
  }
  w.put(h.seed);
  w.put(h.config_hash);
  w.put(h.carrier);
  w.put(h.z);
}

GridHeader read_header(Reader& r, const std::string& path) {
  char m[8];
  r.bytes(m, sizeof m, "magic");
  if (std::memcmp(m, magic, sizeof m) != 0) throw std::runtime_error(fmt::format("'{}' is not a grid file", path));
  const auto bom = r.get<std::uint32_t>("byte-order mark");
  if (bom != byte_order_mark) {
    if (bom == 0x04030201) {
      throw std::runtime_error(fmt::format("'{}' was written with the opposite byte order; convert it first", path));
    }
    throw std::runtime_error(fmt::format("'{}' has a corrupt byte-order mark", path));
  }
  GridHeader h;
  h.version = r.get<std::uint32_t>("version");
  if (h.version != current_version) {
    throw std::runtime_error(fmt::format("'{}' has format version {}, this build reads {}", path, h.version,
                                         current_version));
  }
  const auto payload = r.get<std::uint8_t>("payload kind");
  const auto order = r.get<std::uint8_t>("cell order");
  const auto pol = r.get<std::uint8_t>("polarization");
  const auto norm = r.get<std::uint8_t>("normalization");
  if (payload > 1 || order > 1 || pol > 2 || norm > 1) {
    throw std::runtime_error(fmt::format("'{}' has an invalid header tag", path));
  }
  h.payload = static_cast<PayloadKind>(payload);
  h.order = static_cast<CellOrder>(order);
  h.polarization = static_cast<PolarizationTag>(pol);
  h.normalization = static_cast<Normalization>(norm);
  const auto rank = r.get<std::uint32_t>("rank");
  if (rank < 1 || rank > 3) throw std::runtime_error(fmt::format("'{}' has unsupported rank {}", path, rank));
  for (std::uint32_t i = 0; i < rank; ++i) {
    Axis a;
    const auto kind = r.get<std::uint8_t>("axis kind");
    if (kind > static_cast<std::uint8_t>(AxisKind::lambda)) {
      throw std::runtime_error(fmt::format("'{}' has an invalid axis kind", path));
    }
    a.kind = static_cast<AxisKind>(kind);
    a.size = r.get<std::int32_t>("axis size");
    if (a.size < 1) throw std::runtime_error(fmt::format("'{}' has an empty axis", path));
    a.offset = r.get<double>("axis offset");
    a.spacing = r.get<double>("axis spacing");
    h.axes.push_back(a);
  }
  h.seed = r.get<std::uint64_t>("seed");
  h.config_hash = r.get<std::uint64_t>("config hash");
  h.carrier = r.get<double>("carrier");
  h.z = r.get<double>("z");
  return h;
}

void require_rank(const GridFile& f, std::size_t rank, PayloadKind kind) {
  if (f.header.axes.size() != rank || f.header.payload != kind) {
    throw std::runtime_error(fmt::format("grid file holds a rank-{} {} payload, expected rank {} {}",
                                         f.header.axes.size(),
                                         f.header.payload == PayloadKind::real ? "real" : "complex", rank,
                                         kind == PayloadKind::real ? "real" : "complex"));
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

} // namespace

std::uint64_t GridHeader::cells() const {
  std::uint64_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::uint64_t>(a.size);
  return n;
}

std::uint64_t GridHeader::payload_values() const { return cells() * (payload == PayloadKind::complex ? 2 : 1); }

void write_grid(const std::string& path, const GridFile& file) {
  if (file.payload.size() != file.header.payload_values()) {
    throw std::invalid_argument("grid payload does not match its header");
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  Writer w(path);
  write_header(w, file.header);
  w.put(static_cast<std::uint64_t>(file.payload.size()));
  w.bytes(file.payload.data(), file.payload.size() * sizeof(double));
  w.finish();
}

GridHeader read_grid_header(const std::string& path) {
  Reader r(path);
  return read_header(r, path);
}

GridFile read_grid(const std::string& path) {
  Reader r(path);
  GridFile f;
  f.header = read_header(r, path);
  const auto n = r.get<std::uint64_t>("payload length");
  if (n != f.header.payload_values()) {
    throw std::runtime_error(fmt::format("'{}' declares {} values but its axes need {}", path, n,
                                         f.header.payload_values()));
  }
  f.payload.resize(n);
  r.bytes(f.payload.data(), n * sizeof(double), "payload");
  return f;
}

GridFile to_grid_file(const Spectrum3D& s, const GridMeta& meta) {
  GridFile f;
  f.header.normalization = s.normalization;
  f.header.axes = {s.axes[0], s.axes[1], s.axes[2]};
  f.header.seed = meta.seed;
  f.header.config_hash = meta.config_hash;
  f.header.carrier = meta.carrier;
  f.payload = s.values.storage();
  return f;
}

GridFile to_grid_file(const Spectrum2D& s, const GridMeta& meta) {
  GridFile f;
  f.header.normalization = s.normalization;
  f.header.axes = {s.first, s.second};
  f.header.seed = meta.seed;
  f.header.config_hash = meta.config_hash;
  f.header.carrier = meta.carrier;
  f.payload.resize(static_cast<std::size_t>(s.values.size()));
  for (int a = 0; a < s.values.rows(); ++a)
    for (int b = 0; b < s.values.cols(); ++b) f.payload[static_cast<std::size_t>(a) * s.values.cols() + b] = s.values(a, b);
  return f;
}

GridFile to_grid_file(const SpectralField& field, const GridMeta& meta) {
  const auto& g = field.grid;
  GridFile f;
  f.header.payload = PayloadKind::complex;
  f.header.order = CellOrder::fft;
  f.header.polarization =
      field.polarization == Polarization::ordinary ? PolarizationTag::ordinary : PolarizationTag::extraordinary;
  f.header.normalization = Normalization::photons_per_mode;
  // FFT-order axes: spacing only, offset records the direct-space step
  f.header.axes = {Axis{AxisKind::qx, g.dx, g.dqx(), g.nx}, Axis{AxisKind::qy, g.dy, g.dqy(), g.ny},
                   Axis{AxisKind::omega, g.dt, g.domega(), g.nt}};
  f.header.seed = meta.seed;
  f.header.config_hash = meta.config_hash;
  f.header.carrier = field.carrier;
  f.header.z = field.z;
  f.payload.resize(field.values.size() * 2);
  std::memcpy(f.payload.data(), field.values.data(), f.payload.size() * sizeof(double));
  return f;
}

Spectrum3D spectrum3d_from(const GridFile& file) {
  require_rank(file, 3, PayloadKind::real);
  if (file.header.order != CellOrder::centered) throw std::runtime_error("grid file is not a centred spectrum");
  Spectrum3D s;
  for (int i = 0; i < 3; ++i) s.axes[i] = file.header.axes[i];
  s.values = RealGrid(s.axes[0].size, s.axes[1].size, s.axes[2].size);
  s.values.storage() = file.payload;
  s.normalization = file.header.normalization;
  return s;
}

Spectrum2D spectrum2d_from(const GridFile& file) {
  require_rank(file, 2, PayloadKind::real);
  Spectrum2D s(file.header.axes[0], file.header.axes[1], file.header.normalization);
  for (int a = 0; a < s.values.rows(); ++a)
    for (int b = 0; b < s.values.cols(); ++b) s.values(a, b) = file.payload[static_cast<std::size_t>(a) * s.values.cols() + b];
  return s;
}

SpectralField field_from(const GridFile& file) {
  require_rank(file, 3, PayloadKind::complex);
  if (file.header.order != CellOrder::fft) throw std::runtime_error("grid file is not a field in FFT order");
  const auto& ax = file.header.axes;
  SpectralField f;
  f.grid.nx = ax[0].size;
  f.grid.ny = ax[1].size;
  f.grid.nt = ax[2].size;
  f.grid.dx = ax[0].offset;
  f.grid.dy = ax[1].offset;
  f.grid.dt = ax[2].offset;
  f.polarization = file.header.polarization == PolarizationTag::ordinary ? Polarization::ordinary
                                                                         : Polarization::extraordinary;
  f.carrier = file.header.carrier;
  f.z = file.header.z;
  f.values = ComplexGrid(f.grid.nx, f.grid.ny, f.grid.nt);
  std::memcpy(static_cast<void*>(f.values.data()), file.payload.data(), file.payload.size() * sizeof(double));
  return f;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, r.ptr);
}

std::string slice_csv(const Spectrum2D& slice, AxisMode mode, double carrier) {
  std::string out;
  if (mode == AxisMode::frequency) {
    out = fmt::format("{}_per_m,omega_rad_per_s,value\n", to_string(slice.first.kind));
    for (int a = 0; a < slice.first.size; ++a)
      for (int c = 0; c < slice.second.size; ++c)
        out += format_number(slice.first.value(a)) + "," + format_number(slice.second.value(c)) + "," +
               format_number(slice.values(a, c)) + "\n";
    return out;
  }
  out = "alpha_deg,lambda_nm,value\n";
  for (const auto& p : experimental_points(slice, carrier)) {
    out += format_number(p.alpha_deg) + "," + format_number(p.lambda_nm) + "," + format_number(p.value) + "\n";
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "dtheta_deg,lambda_inc_nm,n_coh,n_inc,slope_rad_per_s_m,provenance,flag\n";
  for (const auto& r : result.rows) {
    const std::string nm = r.lambda_inc ? format_number(*r.lambda_inc * 1e9) : std::string();
    out += format_number(to_degrees(r.dtheta)) + "," + nm + "," + opt_number(r.n_coh) + "," +
           opt_number(r.n_inc) + "," + opt_number(r.slope) + "," + to_string(result.provenance) + "," +
           csv_field(r.flag) + "\n";
  }
  return out;
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["program"] = "upconv";
  j["version"] = version;
  j["command"] = m.command;
  j["config_hash"] = fmt::format("{:016x}", m.config_hash);
  j["seed"] = m.seed;
  j["seconds"] = m.seconds;
  j["config"] = m.config_echo;
  auto outputs = nlohmann::ordered_json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"path", o.path}, {"kind", o.kind}});
  j["outputs"] = outputs;
  nlohmann::ordered_json notes = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.notes) notes[k] = v;
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
}

} // namespace upconv
