#include "hypercal/devices.hpp"

#include <algorithm>
#include <cmath>

#include "hypercal/error.hpp"

namespace hypercal {

DarkReference DarkReference::per_channel(std::vector<double> counts) {
  DarkReference ref;
  ref.bands_ = counts.size();
  ref.counts_ = std::move(counts);
  return ref;
}

DarkReference DarkReference::per_pixel(std::size_t height, std::size_t width, std::size_t bands,
                                       std::vector<double> counts) {
  if (height == 0 || width == 0 || counts.size() != height * width * bands) {
    throw Error(ErrorCode::shape_mismatch, "per-pixel dark reference has " +
                                               std::to_string(counts.size()) +
                                               " values for its declared shape");
  }
  DarkReference ref;
  ref.height_ = height;
  ref.width_ = width;
  ref.bands_ = bands;
  ref.counts_ = std::move(counts);
  return ref;
}

DarkReference DarkReference::from_frames(std::span<const std::vector<double>> frames,
                                         std::size_t height, std::size_t width) {
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no dark frames supplied");
  std::vector<double> minimum = frames.front();
  for (const auto& frame : frames) {
    if (frame.size() != minimum.size()) {
      throw Error(ErrorCode::shape_mismatch, "dark frames have different lengths");
    }
    for (std::size_t i = 0; i < minimum.size(); ++i) minimum[i] = std::min(minimum[i], frame[i]);
  }
  if (height == 0) return per_channel(std::move(minimum));
  if (minimum.size() % (height * width) != 0) {
    throw Error(ErrorCode::shape_mismatch, "dark frame length is not a multiple of H*W");
  }
  const std::size_t bands = minimum.size() / (height * width);
  return per_pixel(height, width, bands, std::move(minimum));
}

std::string_view to_string(DeviceKind kind) noexcept {
  return kind == DeviceKind::spectrometer ? "spectrometer" : "hsi_camera";
}

std::string_view to_string(SpectralRange range) noexcept {
  return range == SpectralRange::vnir ? "vnir" : "swir";
}

DeviceKind device_kind_from_string(std::string_view text) {
  if (text == "spectrometer") return DeviceKind::spectrometer;
  if (text == "hsi_camera") return DeviceKind::hsi_camera;
  throw Error(ErrorCode::format, "unknown device kind '" + std::string(text) + "'");
}

SpectralRange spectral_range_from_string(std::string_view text) {
  if (text == "vnir") return SpectralRange::vnir;
  if (text == "swir") return SpectralRange::swir;
  throw Error(ErrorCode::format, "unknown spectral range '" + std::string(text) + "'");
}

void DeviceSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::configuration, "device '" + name + "': " + what);
  };
  if (grid.empty()) fail("wavelength grid is empty");
  if (saturation == 0) fail("saturation D must be > 0");
  if (!(base_integration_ms > 0.0) || !std::isfinite(base_integration_ms)) {
    fail("base integration time must be > 0");
  }
  if (dark) {
    if (dark->bands() != grid.size()) fail("dark reference does not match the device grid");
    if (kind == DeviceKind::spectrometer && dark->is_per_pixel()) {
      fail("spectrometer dark reference must be per channel");
    }
    const double d = static_cast<double>(saturation);
    for (double v : dark->counts()) {
      if (!(v >= 0.0 && v <= d)) fail("dark reference value outside [0, D]");
    }
  }
}

DeviceSpec DeviceSpec::with_dark(DarkReference reference) const {
  DeviceSpec copy = *this;
  copy.dark = std::move(reference);
  copy.validate();
  return copy;
}

namespace presets {

// Camera bit depth 12, spectrometer 16. The SWIR camera centers include the
// 1119, 1195 and 1300 nm bands used by the moisture index.
DeviceSpec vnir_camera() {
  return {"vnir_camera", DeviceKind::hsi_camera, SpectralRange::vnir,
          WavelengthGrid::linspace(660.0, 900.0, 24), 4095, 0.5, 10.0, std::nullopt};
}

DeviceSpec swir_camera() {
  return {"swir_camera",
          DeviceKind::hsi_camera,
          SpectralRange::swir,
          WavelengthGrid({1119.0, 1195.0, 1255.0, 1300.0, 1365.0, 1440.0, 1520.0, 1605.0, 1690.0}),
          4095,
          1.0,
          10.0,
          std::nullopt};
}

DeviceSpec vnir_spectrometer() {
  return {"vnir_spectrometer", DeviceKind::spectrometer, SpectralRange::vnir,
          WavelengthGrid::linspace(500.0, 1100.0, 256), 65535, 0.5, 0.0, std::nullopt};
}

DeviceSpec swir_spectrometer() {
  return {"swir_spectrometer", DeviceKind::spectrometer, SpectralRange::swir,
          WavelengthGrid::linspace(950.0, 1700.0, 128), 65535, 50.0, 0.0, std::nullopt};
}

DeviceSpec by_name(std::string_view name) {
  if (name == "vnir_camera") return vnir_camera();
  if (name == "swir_camera") return swir_camera();
  if (name == "vnir_spectrometer") return vnir_spectrometer();
  if (name == "swir_spectrometer") return swir_spectrometer();
  throw Error(ErrorCode::configuration, "unknown device preset '" + std::string(name) + "'");
}

}  // namespace presets
}  // namespace hypercal
