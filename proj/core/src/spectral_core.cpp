#include "hypercal/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypercal/error.hpp"

namespace hypercal {
namespace {

constexpr std::size_t kMaxListedPositions = 8;

std::string format_nm(double nm) {
  std::ostringstream out;
  out << nm;
  return out.str();
}

void require_grid(const WavelengthGrid& actual, const WavelengthGrid& expected,
                  const std::string& what) {
  if (!(actual == expected)) {
    throw Error(ErrorCode::grid_mismatch, what + ": grid " + actual.describe() +
                                              " does not match device grid " +
                                              expected.describe());
  }
}

void require_unit(Unit actual, Unit expected, const char* op) {
  if (actual != expected) {
    throw Error(ErrorCode::invalid_argument,
                std::string(op) + ": expected unit " + std::string(to_string(expected)) +
                    ", got " + std::string(to_string(actual)));
  }
}

const DarkReference& require_dark(const DeviceSpec& device) {
  if (!device.dark) {
    throw Error(ErrorCode::configuration,
                "device '" + device.name + "' has no dark reference");
  }
  return *device.dark;
}

}  // namespace

// ---------------------------------------------------------------------------
// WavelengthGrid

WavelengthGrid::WavelengthGrid(std::vector<double> centers_nm) : centers_(std::move(centers_nm)) {
  if (centers_.empty()) {
    throw Error(ErrorCode::invalid_argument, "wavelength grid must have at least one center");
  }
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (!std::isfinite(centers_[i]) || centers_[i] <= 0.0) {
      throw Error(ErrorCode::invalid_argument,
                  "wavelength grid center " + std::to_string(i) + " is not a positive number");
    }
    if (i > 0 && !(centers_[i] > centers_[i - 1])) {
      throw Error(ErrorCode::invalid_argument,
                  "wavelength grid is not strictly increasing at index " + std::to_string(i));
    }
  }
}

WavelengthGrid WavelengthGrid::linspace(double first_nm, double last_nm, std::size_t count) {
  if (count == 0) throw Error(ErrorCode::invalid_argument, "linspace needs count >= 1");
  std::vector<double> centers(count);
  if (count == 1) {
    centers[0] = first_nm;
  } else {
    const double step = (last_nm - first_nm) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) centers[i] = first_nm + step * static_cast<double>(i);
    centers.back() = last_nm;
  }
  return WavelengthGrid(std::move(centers));
}

std::size_t WavelengthGrid::nearest(double nm) const {
  if (centers_.empty()) throw Error(ErrorCode::invalid_argument, "nearest() on an empty grid");
  // First center >= nm; compare with its left neighbour, preferring the lower index.
  auto it = std::lower_bound(centers_.begin(), centers_.end(), nm);
  if (it == centers_.begin()) return 0;
  if (it == centers_.end()) return centers_.size() - 1;
  const auto hi = static_cast<std::size_t>(it - centers_.begin());
  const std::size_t lo = hi - 1;
  return (std::abs(centers_[hi] - nm) < std::abs(centers_[lo] - nm)) ? hi : lo;
}

std::string WavelengthGrid::describe() const {
  if (centers_.empty()) return "0 bands";
  return std::to_string(centers_.size()) + " bands " + format_nm(centers_.front()) + "-" +
         format_nm(centers_.back()) + " nm";
}

// ---------------------------------------------------------------------------
// Unit

std::string_view to_string(Unit unit) noexcept {
  switch (unit) {
    case Unit::digital_counts: return "digital_counts";
    case Unit::normalized: return "normalized";
    case Unit::reflectance: return "reflectance";
  }
  return "unknown";
}

Unit unit_from_string(std::string_view text) {
  if (text == "digital_counts") return Unit::digital_counts;
  if (text == "normalized") return Unit::normalized;
  if (text == "reflectance") return Unit::reflectance;
  throw Error(ErrorCode::format, "unknown unit '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Spectrum

Spectrum::Spectrum(WavelengthGrid grid, std::vector<double> values, double integration_time_ms,
                   Unit unit)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      integration_time_ms_(integration_time_ms),
      unit_(unit) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::shape_mismatch, "spectrum has " + std::to_string(values_.size()) +
                                               " values for a grid of " +
                                               std::to_string(grid_.size()));
  }
  if (!(integration_time_ms_ > 0.0) || !std::isfinite(integration_time_ms_)) {
    throw Error(ErrorCode::domain, "spectrum integration time must be > 0 ms");
  }
}

Spectrum Spectrum::with_values(std::vector<double> values, Unit unit) const {
  return Spectrum(grid_, std::move(values), integration_time_ms_, unit);
}

// ---------------------------------------------------------------------------
// DataCube

DataCube::DataCube(std::size_t height, std::size_t width, WavelengthGrid grid, Unit unit,
                   double integration_time_ms, std::vector<double> values)
    : height_(height),
      width_(width),
      grid_(std::move(grid)),
      unit_(unit),
      integration_time_ms_(integration_time_ms),
      values_(std::move(values)) {
  if (height_ == 0 || width_ == 0) {
    throw Error(ErrorCode::shape_mismatch, "datacube height and width must be >= 1");
  }
  const std::size_t expected = height_ * width_ * grid_.size();
  if (values_.empty()) {
    values_.assign(expected, 0.0);
  } else if (values_.size() != expected) {
    throw Error(ErrorCode::shape_mismatch,
                "datacube expects " + std::to_string(expected) + " values, got " +
                    std::to_string(values_.size()));
  }
  if (!(integration_time_ms_ > 0.0) || !std::isfinite(integration_time_ms_)) {
    throw Error(ErrorCode::domain, "datacube integration time must be > 0 ms");
  }
}

DataCube DataCube::with_values(std::vector<double> values, Unit unit) const {
  return DataCube(height_, width_, grid_, unit, integration_time_ms_, std::move(values));
}

DataCube DataCube::with_integration_time(double integration_time_ms) const {
  return DataCube(height_, width_, grid_, unit_, integration_time_ms, values_);
}

// ---------------------------------------------------------------------------
// Operations

namespace {

template <typename Positions>
[[noreturn]] void throw_saturation(const std::string& device, std::size_t total,
                                   const Positions& listed, double limit) {
  std::ostringstream msg;
  msg << "device '" << device << "': " << total << " value(s) exceed saturation D=" << limit
      << " at";
  for (const auto& p : listed) msg << ' ' << p;
  if (total > listed.size()) msg << " ...";
  throw Error(ErrorCode::saturation, msg.str());
}

}  // namespace

Spectrum normalize_counts(const Spectrum& raw, const DeviceSpec& device) {
  require_unit(raw.unit(), Unit::digital_counts, "normalize_counts");
  require_grid(raw.grid(), device.grid, "normalize_counts");
  const double d = static_cast<double>(device.saturation);
  if (!(d > 0.0)) throw Error(ErrorCode::configuration, "device saturation D must be > 0");

  std::vector<std::string> listed;
  std::size_t saturated = 0;
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (v > d || !(v >= 0.0)) {
      if (v > d) {
        if (listed.size() < kMaxListedPositions) listed.push_back("[" + std::to_string(i) + "]");
        ++saturated;
        continue;
      }
      throw Error(ErrorCode::domain, "negative or non-finite count at channel " + std::to_string(i));
    }
    out[i] = v / d;
  }
  if (saturated > 0) throw_saturation(device.name, saturated, listed, d);
  return raw.with_values(std::move(out), Unit::normalized);
}

DataCube normalize_counts(const DataCube& raw, const DeviceSpec& device) {
  require_unit(raw.unit(), Unit::digital_counts, "normalize_counts");
  require_grid(raw.grid(), device.grid, "normalize_counts");
  const double d = static_cast<double>(device.saturation);
  if (!(d > 0.0)) throw Error(ErrorCode::configuration, "device saturation D must be > 0");

  const std::size_t bands = raw.bands();
  std::vector<std::string> listed;
  std::size_t saturated = 0;
  std::vector<double> out(raw.values().size());
  const auto in = raw.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = in[i];
    if (v > d) {
      if (listed.size() < kMaxListedPositions) {
        const std::size_t pixel = i / bands;
        listed.push_back("(" + std::to_string(pixel / raw.width()) + "," +
                         std::to_string(pixel % raw.width()) + "," +
                         std::to_string(i % bands) + ")");
      }
      ++saturated;
      continue;
    }
    if (!(v >= 0.0)) {
      throw Error(ErrorCode::domain, "negative or non-finite count in datacube");
    }
    out[i] = v / d;
  }
  if (saturated > 0) throw_saturation(device.name, saturated, listed, d);
  return raw.with_values(std::move(out), Unit::normalized);
}

Spectrum subtract_dark(const Spectrum& normalized, const DeviceSpec& device) {
  require_unit(normalized.unit(), Unit::normalized, "subtract_dark");
  require_grid(normalized.grid(), device.grid, "subtract_dark");
  const DarkReference& dark = require_dark(device);
  if (dark.is_per_pixel() || dark.bands() != normalized.size()) {
    throw Error(ErrorCode::configuration,
                "spectrum dark subtraction needs a per-channel dark reference of " +
                    std::to_string(normalized.size()) + " values");
  }
  const double d = static_cast<double>(device.saturation);
  std::vector<double> out(normalized.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(0.0, normalized[i] - dark.at(0, 0, i) / d);
  }
  return normalized.with_values(std::move(out), Unit::normalized);
}

DataCube subtract_dark(const DataCube& normalized, const DeviceSpec& device) {
  require_unit(normalized.unit(), Unit::normalized, "subtract_dark");
  require_grid(normalized.grid(), device.grid, "subtract_dark");
  const DarkReference& dark = require_dark(device);
  if (dark.bands() != normalized.bands() ||
      (dark.is_per_pixel() &&
       (dark.height() != normalized.height() || dark.width() != normalized.width()))) {
    throw Error(ErrorCode::configuration, "dark reference shape does not match the datacube");
  }
  const double d = static_cast<double>(device.saturation);
  std::vector<double> out(normalized.values().size());
  for (std::size_t r = 0; r < normalized.height(); ++r) {
    for (std::size_t c = 0; c < normalized.width(); ++c) {
      for (std::size_t b = 0; b < normalized.bands(); ++b) {
        const std::size_t i = normalized.offset(r, c, b);
        out[i] = std::max(0.0, normalized.values()[i] - dark.at(r, c, b) / d);
      }
    }
  }
  return normalized.with_values(std::move(out), Unit::normalized);
}

WavelengthGrid BandMapping::calibrated_grid() const {
  std::vector<double> centers;
  centers.reserve(indices.size());
  for (std::size_t idx : indices) centers.push_back(source[idx]);
  return WavelengthGrid(std::move(centers));
}

BandMapping build_band_mapping(const WavelengthGrid& source, const WavelengthGrid& target) {
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::invalid_argument, "band mapping needs non-empty grids");
  }
  std::vector<double> uncovered;
  for (double nm : target.centers()) {
    if (nm < source.front() || nm > source.back()) uncovered.push_back(nm);
  }
  if (!uncovered.empty()) {
    std::ostringstream msg;
    msg << "source grid " << source.describe() << " does not span target wavelengths:";
    for (double nm : uncovered) msg << ' ' << nm;
    throw Error(ErrorCode::span_violation, msg.str());
  }

  BandMapping mapping{source, target, {}};
  mapping.indices.reserve(target.size());
  for (double nm : target.centers()) mapping.indices.push_back(source.nearest(nm));
  return mapping;
}

Spectrum downsample_spectrum(const Spectrum& spectrum, const BandMapping& mapping) {
  require_grid(spectrum.grid(), mapping.source, "downsample_spectrum");
  std::vector<double> out;
  out.reserve(mapping.indices.size());
  for (std::size_t idx : mapping.indices) out.push_back(spectrum[idx]);
  return Spectrum(mapping.calibrated_grid(), std::move(out), spectrum.integration_time_ms(),
                  spectrum.unit());
}

double integration_scale(double base_ms, double new_ms) {
  if (!(base_ms > 0.0) || !(new_ms > 0.0) || !std::isfinite(base_ms) || !std::isfinite(new_ms)) {
    throw Error(ErrorCode::domain, "integration times must be finite and > 0");
  }
  return base_ms / new_ms;
}

DataCube stack_cubes(const DataCube& a, const DataCube& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::shape_mismatch,
                "cannot stack " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                    " with " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
  if (a.bands() == 0) return b;
  if (b.bands() == 0) return a;
  if (a.unit() != b.unit()) {
    throw Error(ErrorCode::invalid_argument, "cannot stack cubes with different units");
  }
  const bool a_first = a.grid().back() < b.grid().front();
  const bool b_first = b.grid().back() < a.grid().front();
  if (!a_first && !b_first) {
    throw Error(ErrorCode::invalid_argument, "wavelength ranges overlap: " + a.grid().describe() +
                                                 " and " + b.grid().describe());
  }
  const DataCube& lo = a_first ? a : b;
  const DataCube& hi = a_first ? b : a;

  std::vector<double> centers(lo.grid().centers().begin(), lo.grid().centers().end());
  centers.insert(centers.end(), hi.grid().centers().begin(), hi.grid().centers().end());
  const std::size_t bands = centers.size();

  std::vector<double> values;
  values.reserve(a.pixel_count() * bands);
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    const auto lp = lo.pixel(p);
    const auto hp = hi.pixel(p);
    values.insert(values.end(), lp.begin(), lp.end());
    values.insert(values.end(), hp.begin(), hp.end());
  }
  // Both cubes keep their own exposure; a.integration_time_ms() labels the stack.
  return DataCube(a.height(), a.width(), WavelengthGrid(std::move(centers)), a.unit(),
                  a.integration_time_ms(), std::move(values));
}

}  // namespace hypercal
