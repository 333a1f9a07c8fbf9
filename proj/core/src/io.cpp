#include "hypercal/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "hypercal/error.hpp"

namespace hypercal::io {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_double(std::string_view text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::size_t parse_size(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::format, "ENVI header field '" + key + "' is not a non-negative integer: '" + t + "'");
  }
  return value;
}

bool host_is_little() { return std::endian::native == std::endian::little; }

template <typename T>
T load(const unsigned char* p, bool swap) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if (swap) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

double decode_sample(const unsigned char* p, int type, bool swap) {
  switch (type) {
    case 1: return static_cast<double>(*p);
    case 2: return static_cast<double>(load<std::int16_t>(p, swap));
    case 3: return static_cast<double>(load<std::int32_t>(p, swap));
    case 4: return static_cast<double>(load<float>(p, swap));
    case 5: return load<double>(p, swap);
    case 12: return static_cast<double>(load<std::uint16_t>(p, swap));
    case 13: return static_cast<double>(load<std::uint32_t>(p, swap));
    default: break;
  }
  throw Error(ErrorCode::format, "unsupported ENVI data type " + std::to_string(type));
}

nlohmann::json parse_json(std::string_view text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, source + ": invalid JSON: " + e.what());
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

// --- ENVI ----------------------------------------------------------------------

std::size_t envi_type_size(int data_type) {
  switch (data_type) {
    case 1: return 1;
    case 2: case 12: return 2;
    case 3: case 4: case 13: return 4;
    case 5: return 8;
    default: break;
  }
  throw Error(ErrorCode::format, "unsupported ENVI data type " + std::to_string(data_type));
}

EnviHeader parse_envi_header(std::string_view text) {
  std::string body(text);
  if (trim(body).rfind("ENVI", 0) != 0) {
    throw Error(ErrorCode::format, "ENVI header must start with 'ENVI'");
  }
  EnviHeader h;
  bool have_samples = false, have_lines = false, have_bands = false, have_type = false;
  std::size_t pos = body.find('\n');
  while (pos != std::string::npos && pos < body.size()) {
    const std::size_t eq_line_end = body.find('\n', pos + 1);
    std::string line = body.substr(pos + 1, eq_line_end == std::string::npos ? std::string::npos
                                                                               : eq_line_end - pos - 1);
    pos = eq_line_end;
    const auto eq = line.find('=');
    if (trim(line).empty() || trim(line)[0] == ';') continue;
    if (eq == std::string::npos) {
      throw Error(ErrorCode::format, "ENVI header line without '=': '" + trim(line) + "'");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      // Braced values may span lines.
      while (value.find('}') == std::string::npos) {
        if (pos == std::string::npos) {
          throw Error(ErrorCode::format, "unterminated '{' in ENVI field '" + key + "'");
        }
        const std::size_t next = body.find('\n', pos + 1);
        value += " " + trim(body.substr(pos + 1, next == std::string::npos ? std::string::npos
                                                                           : next - pos - 1));
        pos = next;
      }
      value = trim(value.substr(1, value.find('}') - 1));
    }
    if (key == "samples") {
      h.samples = parse_size(key, value);
      have_samples = true;
    } else if (key == "lines") {
      h.lines = parse_size(key, value);
      have_lines = true;
    } else if (key == "bands") {
      h.bands = parse_size(key, value);
      have_bands = true;
    } else if (key == "data type") {
      h.data_type = static_cast<int>(parse_size(key, value));
      envi_type_size(h.data_type);
      have_type = true;
    } else if (key == "interleave") {
      h.interleave = lower(value);
    } else if (key == "byte order") {
      h.byte_order = static_cast<int>(parse_size(key, value));
      if (h.byte_order > 1) throw Error(ErrorCode::format, "ENVI byte order must be 0 or 1");
    } else if (key == "header offset") {
      h.header_offset = parse_size(key, value);
    } else if (key == "wavelength") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        double nm = 0.0;
        if (!parse_double(item, nm)) {
          throw Error(ErrorCode::format, "bad wavelength entry '" + trim(item) + "'");
        }
        h.wavelengths.push_back(nm);
      }
    } else if (key == "integration_time_ms") {
      double t = 0.0;
      if (!parse_double(value, t)) throw Error(ErrorCode::format, "bad integration_time_ms '" + value + "'");
      h.integration_time_ms = t;
    } else if (key == "unit") {
      h.unit = unit_from_string(value);
    }
    // Other standard ENVI keys (description, file type, wavelength units, ...) are ignored.
  }
  if (!have_samples || !have_lines || !have_bands || !have_type) {
    throw Error(ErrorCode::format, "ENVI header needs samples, lines, bands and data type");
  }
  if (h.interleave != "bsq") {
    throw Error(ErrorCode::format, "unsupported interleave '" + h.interleave + "' (only bsq)");
  }
  if (!h.wavelengths.empty() && h.wavelengths.size() != h.bands) {
    throw Error(ErrorCode::format, "ENVI header lists " + std::to_string(h.wavelengths.size()) +
                                       " wavelengths for " + std::to_string(h.bands) + " bands");
  }
  return h;
}

std::string format_envi_header(const EnviHeader& h) {
  std::ostringstream out;
  out << "ENVI\n";
  out << "samples = " << h.samples << "\n";
  out << "lines = " << h.lines << "\n";
  out << "bands = " << h.bands << "\n";
  out << "header offset = " << h.header_offset << "\n";
  out << "file type = ENVI Standard\n";
  out << "data type = " << h.data_type << "\n";
  out << "interleave = " << h.interleave << "\n";
  out << "byte order = " << h.byte_order << "\n";
  if (!h.wavelengths.empty()) {
    out << "wavelength units = Nanometers\n";
    out << "wavelength = {";
    for (std::size_t i = 0; i < h.wavelengths.size(); ++i) {
      out << (i ? ", " : "") << format_double(h.wavelengths[i]);
    }
    out << "}\n";
  }
  if (h.integration_time_ms) out << "integration_time_ms = " << format_double(*h.integration_time_ms) << "\n";
  if (h.unit) out << "unit = " << to_string(*h.unit) << "\n";
  return out.str();
}

EnviHeader read_envi_header(const fs::path& hdr_path) {
  try {
    return parse_envi_header(read_text(hdr_path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), hdr_path.string() + ": " + e.what());
  }
}

fs::path envi_body_path(const fs::path& hdr_path) {
  fs::path body = hdr_path;
  body.replace_extension(".img");
  return body;
}

void write_cube(const DataCube& cube, const fs::path& hdr_path) {
  if (cube.bands() == 0) throw Error(ErrorCode::invalid_argument, "cannot write a zero-band cube");
  EnviHeader h;
  h.samples = cube.width();
  h.lines = cube.height();
  h.bands = cube.bands();
  h.data_type = 5;
  h.wavelengths.assign(cube.grid().centers().begin(), cube.grid().centers().end());
  h.integration_time_ms = cube.integration_time_ms();
  h.unit = cube.unit();
  write_text(hdr_path, format_envi_header(h));

  const std::size_t plane = cube.pixel_count();
  std::vector<unsigned char> bytes(plane * cube.bands() * 8);
  const bool swap = !host_is_little();
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    for (std::size_t p = 0; p < plane; ++p) {
      unsigned char* dst = bytes.data() + (b * plane + p) * 8;
      const double v = cube.values()[p * cube.bands() + b];
      std::memcpy(dst, &v, 8);
      if (swap) std::reverse(dst, dst + 8);
    }
  }
  const fs::path body = envi_body_path(hdr_path);
  write_text(body, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

DataCube read_cube(const fs::path& hdr_path) {
  const EnviHeader h = read_envi_header(hdr_path);
  const fs::path body_path = envi_body_path(hdr_path);
  const std::string body = read_text(body_path);
  const std::size_t elem = envi_type_size(h.data_type);
  const std::size_t expected = h.header_offset + h.samples * h.lines * h.bands * elem;
  if (body.size() != expected) {
    throw Error(ErrorCode::format, body_path.string() + ": body has " + std::to_string(body.size()) +
                                       " bytes, header " + hdr_path.string() + " implies " +
                                       std::to_string(expected));
  }
  if (h.wavelengths.empty()) {
    throw Error(ErrorCode::format, hdr_path.string() + ": header has no wavelength list");
  }
  const bool file_little = h.byte_order == 0;
  const bool swap = file_little != host_is_little();
  const std::size_t plane = h.samples * h.lines;
  std::vector<double> values(plane * h.bands);
  const auto* src = reinterpret_cast<const unsigned char*>(body.data()) + h.header_offset;
  for (std::size_t b = 0; b < h.bands; ++b) {
    for (std::size_t p = 0; p < plane; ++p) {
      values[p * h.bands + b] = decode_sample(src + (b * plane + p) * elem, h.data_type, swap);
    }
  }
  return DataCube(h.lines, h.samples, WavelengthGrid(h.wavelengths),
                  h.unit.value_or(Unit::digital_counts), h.integration_time_ms.value_or(1.0),
                  std::move(values));
}

// --- spectra -----------------------------------------------------------------

std::string format_spectrum_csv(const Spectrum& spectrum) {
  std::string out;
  out += "# integration_time_ms=" + format_double(spectrum.integration_time_ms()) + "\n";
  out += "# unit=" + std::string(to_string(spectrum.unit())) + "\n";
  out += "wavelength_nm,counts\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    out += format_double(spectrum.grid()[i]) + "," + format_double(spectrum[i]) + "\n";
  }
  return out;
}

Spectrum parse_spectrum_csv(std::string_view text, const std::string& source) {
  std::optional<double> integration;
  Unit unit = Unit::digital_counts;
  bool header_seen = false;
  std::vector<double> wavelengths;
  std::vector<double> values;
  std::size_t line_no = 0;
  std::stringstream ss{std::string(text)};
  std::string line;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::format, source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string meta = trim(std::string_view(t).substr(1));
      const auto eq = meta.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(meta.substr(0, eq));
      const std::string value = trim(meta.substr(eq + 1));
      if (key == "integration_time_ms") {
        double v = 0.0;
        if (!parse_double(value, v)) fail("bad integration_time_ms '" + value + "'");
        integration = v;
      } else if (key == "unit") {
        unit = unit_from_string(value);
      }
      continue;
    }
    if (!header_seen) {
      if (lower(t) != "wavelength_nm,counts") fail("expected header 'wavelength_nm,counts'");
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    double nm = 0.0;
    double v = 0.0;
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos ||
        !parse_double(std::string_view(t).substr(0, comma), nm) ||
        !parse_double(std::string_view(t).substr(comma + 1), v)) {
      fail("malformed row '" + t + "'");
    }
    if (!wavelengths.empty() && !(nm > wavelengths.back())) {
      fail("wavelengths must be strictly increasing");
    }
    wavelengths.push_back(nm);
    values.push_back(v);
  }
  if (wavelengths.empty()) throw Error(ErrorCode::format, source + ": spectrum file has no data rows");
  if (!integration) throw Error(ErrorCode::format, source + ": missing '# integration_time_ms=' line");
  return Spectrum(WavelengthGrid(std::move(wavelengths)), std::move(values), *integration, unit);
}

void write_spectrum(const Spectrum& spectrum, const fs::path& path) {
  write_text(path, format_spectrum_csv(spectrum));
}

Spectrum read_spectrum(const fs::path& path) { return parse_spectrum_csv(read_text(path), path.string()); }

// --- devices -----------------------------------------------------------------

std::string device_to_json(const DeviceSpec& device) {
  nlohmann::ordered_json j;
  j["name"] = device.name;
  j["kind"] = std::string(to_string(device.kind));
  j["range"] = std::string(to_string(device.range));
  j["wavelengths_nm"] = std::vector<double>(device.grid.centers().begin(), device.grid.centers().end());
  j["saturation"] = device.saturation;
  j["base_integration_ms"] = device.base_integration_ms;
  j["frame_rate_hz"] = device.frame_rate_hz;
  if (device.dark) {
    nlohmann::ordered_json d;
    d["height"] = device.dark->height();
    d["width"] = device.dark->width();
    d["bands"] = device.dark->bands();
    d["counts"] = std::vector<double>(device.dark->counts().begin(), device.dark->counts().end());
    j["dark"] = d;
  }
  return j.dump(2) + "\n";
}

DeviceSpec device_from_json(std::string_view text, const std::string& source) {
  const nlohmann::json j = parse_json(text, source);
  if (!j.is_object()) throw Error(ErrorCode::format, source + ": device file must be a JSON object");
  static const std::vector<std::string> known = {"name",       "kind",        "range",
                                                 "wavelengths_nm", "saturation", "base_integration_ms",
                                                 "frame_rate_hz",  "dark"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::configuration, source + ": unknown device field '" + key + "'");
    }
  }
  DeviceSpec d;
  try {
    d.name = j.at("name").get<std::string>();
    d.kind = device_kind_from_string(j.at("kind").get<std::string>());
    d.range = spectral_range_from_string(j.at("range").get<std::string>());
    d.grid = WavelengthGrid(j.at("wavelengths_nm").get<std::vector<double>>());
    d.saturation = j.at("saturation").get<std::uint32_t>();
    d.base_integration_ms = j.at("base_integration_ms").get<double>();
    d.frame_rate_hz = j.value("frame_rate_hz", 0.0);
    if (j.contains("dark")) {
      const auto& dk = j.at("dark");
      const auto h = dk.at("height").get<std::size_t>();
      const auto w = dk.at("width").get<std::size_t>();
      const auto b = dk.at("bands").get<std::size_t>();
      auto counts = dk.at("counts").get<std::vector<double>>();
      d.dark = h > 0 ? DarkReference::per_pixel(h, w, b, std::move(counts))
                     : DarkReference::per_channel(std::move(counts));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, source + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  }
  try {
    d.validate();
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  }
  return d;
}

void write_device(const DeviceSpec& device, const fs::path& path) {
  write_text(path, device_to_json(device));
}

DeviceSpec read_device(const fs::path& path) { return device_from_json(read_text(path), path.string()); }

// --- visual summaries --------------------------------------------------------

void write_png_gray(const fs::path& path, std::span<const double> values, std::size_t height,
                    std::size_t width, double lo, double hi) {
  if (values.size() != height * width || values.empty()) {
    throw Error(ErrorCode::shape_mismatch, "PNG values do not match H x W");
  }
  if (!(hi > lo)) throw Error(ErrorCode::invalid_argument, "PNG range needs hi > lo");
  std::vector<png_byte> pixels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double scaled = std::isfinite(v) ? (v - lo) / (hi - lo) * 255.0 : 0.0;
    pixels[i] = static_cast<png_byte>(std::lround(std::clamp(scaled, 0.0, 255.0)));
  }

  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    std::fclose(fp);
    throw Error(ErrorCode::io, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorCode::io, "libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < height; ++r) png_write_row(png, pixels.data() + r * width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_mask_png(const fs::path& path, const std::vector<bool>& mask, std::size_t height,
                    std::size_t width) {
  std::vector<double> values(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) values[i] = mask[i] ? 1.0 : 0.0;
  write_png_gray(path, values, height, width, 0.0, 1.0);
}

void write_map_csv(const fs::path& path, std::span<const double> values, std::size_t height,
                   std::size_t width) {
  if (values.size() != height * width) {
    throw Error(ErrorCode::shape_mismatch, "map values do not match H x W");
  }
  std::string out;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      out += (c ? "," : "") + format_double(values[r * width + c]);
    }
    out += "\n";
  }
  write_text(path, out);
}

std::vector<double> read_map_csv(const fs::path& path, std::size_t& height, std::size_t& width) {
  std::stringstream ss(read_text(path));
  std::string line;
  std::vector<double> values;
  height = 0;
  width = 0;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(row, cell, ',')) {
      double v = 0.0;
      if (!parse_double(cell, v)) {
        throw Error(ErrorCode::format, path.string() + ": bad value '" + trim(cell) + "'");
      }
      values.push_back(v);
      ++cols;
    }
    if (height == 0) width = cols;
    if (cols != width) throw Error(ErrorCode::format, path.string() + ": ragged rows");
    ++height;
  }
  if (height == 0) throw Error(ErrorCode::format, path.string() + ": empty map");
  return values;
}

std::string report_table_row(const ReconstructionReport& report, std::string_view model_name) {
  std::string out(model_name);
  for (const MetricSummary* m : {&report.mse, &report.mae, &report.sam}) {
    out += "," + format_double(m->mean) + "," + format_double(m->stddev);
  }
  out += "," + std::to_string(report.zero_norm_count) + "," +
         std::to_string(report.model_size_bytes_per_pixel) + "\n";
  return out;
}

std::string report_summary(const ReconstructionReport& report, std::string_view model_name) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "model: %.*s\n"
                "pixels: %zux%zu, test samples: %zu\n"
                "MSE: %.6g +/- %.6g\n"
                "MAE: %.6g +/- %.6g\n"
                "SAM: %.6g +/- %.6g rad\n"
                "zero-norm spectra: %zu\n"
                "model size: %zu bytes per pixel\n",
                static_cast<int>(model_name.size()), model_name.data(), report.height, report.width,
                report.samples, report.mse.mean, report.mse.stddev, report.mae.mean,
                report.mae.stddev, report.sam.mean, report.sam.stddev, report.zero_norm_count,
                report.model_size_bytes_per_pixel);
  return buf;
}

}  // namespace hypercal::io
