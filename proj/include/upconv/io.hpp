#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "upconv/analysis.hpp"
#include "upconv/grid.hpp"
#include "upconv/simulator.hpp"

namespace upconv {

enum class PayloadKind : std::uint8_t { real = 0, complex = 1 };
/// Cell order of the payload: centred (spectra) or FFT bin order (fields).
enum class CellOrder : std::uint8_t { centered = 0, fft = 1 };
enum class PolarizationTag : std::uint8_t { none = 0, ordinary = 1, extraordinary = 2 };

/// Everything in a grid file except the payload.
struct GridHeader {
  std::uint32_t version = 1;
  PayloadKind payload = PayloadKind::real;
  CellOrder order = CellOrder::centered;
  PolarizationTag polarization = PolarizationTag::none;
  Normalization normalization = Normalization::arbitrary;
  std::vector<Axis> axes;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  /// Carrier angular frequency the Omega axis refers to, and z for fields.
  double carrier = 0.0;
  double z = 0.0;

  std::uint64_t cells() const;
  /// Number of doubles in the payload.
  std::uint64_t payload_values() const;
};

struct GridFile {
  GridHeader header;
  std::vector<double> payload;
};

/// Provenance stamped into grid headers.
struct GridMeta {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double carrier = 0.0;
};

/// Little-endian header plus dense payload. Throws std::runtime_error on I/O failure.
void write_grid(const std::string& path, const GridFile& file);
/// Reads only the header. Throws std::runtime_error on bad magic, version or byte order.
GridHeader read_grid_header(const std::string& path);
/// Throws std::runtime_error additionally on a truncated payload.
GridFile read_grid(const std::string& path);

GridFile to_grid_file(const Spectrum3D& s, const GridMeta& meta);
GridFile to_grid_file(const Spectrum2D& s, const GridMeta& meta);
GridFile to_grid_file(const SpectralField& f, const GridMeta& meta);
Spectrum3D spectrum3d_from(const GridFile& file);
Spectrum2D spectrum2d_from(const GridFile& file);
SpectralField field_from(const GridFile& file);

/// Decimal with 9 significant digits, '.' separator, independent of locale.
std::string format_number(double v);

/// Long-format slice: one row per cell with axis columns named by `mode`.
std::string slice_csv(const Spectrum2D& slice, AxisMode mode, double carrier);
std::string sweep_csv(const SweepResult& result);

struct ManifestOutput {
  std::string path;
  std::string kind;
};

struct Manifest {
  std::string command;
  std::string config_echo;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::vector<ManifestOutput> outputs;
  std::vector<std::pair<std::string, std::string>> notes;
};

std::string manifest_json(const Manifest& m);

/// Writes text to path, creating parent directories; throws std::runtime_error on failure.
void write_text(const std::string& path, const std::string& text);

} // namespace upconv
