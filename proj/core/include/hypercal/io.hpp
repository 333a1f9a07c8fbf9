#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hypercal/devices.hpp"
#include "hypercal/spectral_types.hpp"
#include "hypercal/whiteref_model.hpp"

namespace hypercal::io {

namespace fs = std::filesystem;

// --- ENVI cubes --------------------------------------------------------------
//
// `<stem>.hdr` text header plus `<stem>.img` raw body, band sequential.
// Cubes are written as little-endian float64 (data type 5); the reader also
// accepts data types 1, 2, 3, 4, 12 and 13 in either byte order.

struct EnviHeader {
  std::size_t samples = 0;  ///< width
  std::size_t lines = 0;    ///< height
  std::size_t bands = 0;
  int data_type = 5;
  std::string interleave = "bsq";
  int byte_order = 0;
  std::size_t header_offset = 0;
  std::vector<double> wavelengths;
  std::optional<double> integration_time_ms;
  std::optional<Unit> unit;
};

std::size_t envi_type_size(int data_type);

EnviHeader parse_envi_header(std::string_view text);
std::string format_envi_header(const EnviHeader& header);
EnviHeader read_envi_header(const fs::path& hdr_path);

/// Body path for a header path: the same stem with extension `.img`.
fs::path envi_body_path(const fs::path& hdr_path);

void write_cube(const DataCube& cube, const fs::path& hdr_path);
DataCube read_cube(const fs::path& hdr_path);

// --- spectra -----------------------------------------------------------------
//
// CSV with `# integration_time_ms=<t>` and `# unit=<unit>` comment lines, a
// `wavelength_nm,counts` header row, then one row per channel. Values are
// written with 17 significant digits so doubles round-trip exactly.

std::string format_spectrum_csv(const Spectrum& spectrum);
Spectrum parse_spectrum_csv(std::string_view text, const std::string& source = "<memory>");
void write_spectrum(const Spectrum& spectrum, const fs::path& path);
Spectrum read_spectrum(const fs::path& path);

// --- devices -----------------------------------------------------------------

std::string device_to_json(const DeviceSpec& device);
DeviceSpec device_from_json(std::string_view text, const std::string& source = "<memory>");
void write_device(const DeviceSpec& device, const fs::path& path);
DeviceSpec read_device(const fs::path& path);

// --- visual summaries --------------------------------------------------------

/// 8-bit grayscale PNG; `lo` maps to 0 and `hi` to 255, values clamp.
void write_png_gray(const fs::path& path, std::span<const double> values, std::size_t height,
                    std::size_t width, double lo, double hi);
void write_mask_png(const fs::path& path, const std::vector<bool>& mask, std::size_t height,
                    std::size_t width);

/// One CSV row per image row, 17 significant digits.
void write_map_csv(const fs::path& path, std::span<const double> values, std::size_t height,
                   std::size_t width);
std::vector<double> read_map_csv(const fs::path& path, std::size_t& height, std::size_t& width);

/// One row per model: MSE, MAE and SAM as mean and std over pixels.
inline constexpr std::string_view kReportTableHeader =
    "model,mse_mean,mse_std,mae_mean,mae_std,sam_mean,sam_std,zero_norm,bytes_per_pixel";
std::string report_table_row(const ReconstructionReport& report, std::string_view model_name);
std::string report_summary(const ReconstructionReport& report, std::string_view model_name);

// --- helpers -----------------------------------------------------------------

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);
/// "%.17g" formatting.
std::string format_double(double value);

}  // namespace hypercal::io
