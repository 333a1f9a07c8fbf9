#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hypercal/spectral_types.hpp"

namespace hypercal {

/// Per-channel minimum dark counts. Either one value per band, broadcast
/// over every pixel, or a full per-pixel-per-band cube.
class DarkReference {
 public:
  DarkReference() = default;

  static DarkReference per_channel(std::vector<double> counts);
  static DarkReference per_pixel(std::size_t height, std::size_t width, std::size_t bands,
                                 std::vector<double> counts);

  /// Elementwise minimum over a stack of dark frames of equal length.
  /// `height`/`width` of 0 means the frames are per-channel spectra.
  static DarkReference from_frames(std::span<const std::vector<double>> frames,
                                   std::size_t height = 0, std::size_t width = 0);

  bool is_per_pixel() const noexcept { return height_ > 0; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bands() const noexcept { return bands_; }
  std::span<const double> counts() const noexcept { return counts_; }

  /// Dark count for pixel (r, c); per-channel references ignore the pixel.
  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return height_ > 0 ? counts_[(row * width_ + col) * bands_ + band] : counts_[band];
  }

  friend bool operator==(const DarkReference&, const DarkReference&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t bands_ = 0;
  std::vector<double> counts_;
};

enum class DeviceKind { spectrometer, hsi_camera };
enum class SpectralRange { vnir, swir };

std::string_view to_string(DeviceKind kind) noexcept;
std::string_view to_string(SpectralRange range) noexcept;
DeviceKind device_kind_from_string(std::string_view text);
SpectralRange spectral_range_from_string(std::string_view text);

/// Static description of a spectrometer or hyperspectral camera.
struct DeviceSpec {
  std::string name;
  DeviceKind kind = DeviceKind::hsi_camera;
  SpectralRange range = SpectralRange::vnir;
  WavelengthGrid grid;
  std::uint32_t saturation = 0;  ///< D: maximum digital count
  double base_integration_ms = 0.0;
  double frame_rate_hz = 0.0;  ///< metadata only
  std::optional<DarkReference> dark;

  /// Throws Error(configuration) when an invariant does not hold.
  void validate() const;

  DeviceSpec with_dark(DarkReference reference) const;
};

/// Device presets mirroring the training rig. Presets carry no dark reference.
namespace presets {
DeviceSpec vnir_camera();        ///< 24 bands, 660-900 nm, 0.5 ms, 10 Hz
DeviceSpec swir_camera();        ///< 9 bands, 1100-1700 nm, 1.0 ms, 10 Hz
DeviceSpec vnir_spectrometer();  ///< 256 channels, 500-1100 nm, 0.5 ms
DeviceSpec swir_spectrometer();  ///< 128 channels, 950-1700 nm, 50 ms
DeviceSpec by_name(std::string_view name);
}  // namespace presets

}  // namespace hypercal
