#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hypercal/devices.hpp"
#include "hypercal/spectral_types.hpp"
#include "hypercal/whiteref_model.hpp"

namespace hypercal::synth {

enum class IlluminationKind { flat, solar_like, dim };

/// Fine grid the illumination is generated on.
WavelengthGrid default_fine_grid();  // 350-1800 nm, 2 nm steps

/// Wavelengths of the water-absorption notches in the solar-like spectrum.
inline constexpr double kNotch1195Nm = 1195.0;
inline constexpr double kNotch1400Nm = 1400.0;
inline constexpr double kDimFactor = 0.08;
inline constexpr double kIlluminationLevel = 0.75;

struct IlluminationOptions {
  WavelengthGrid grid = default_fine_grid();
  /// 0 gives the nominal spectrum for any seed. Larger values draw a random
  /// spectral tilt/curvature and notch-depth variation of that relative size.
  double variability = 0.0;
};

/// Positive relative spectral power on options.grid. flat and the nominal
/// solar_like peak sit at kIlluminationLevel so a unit-gain render stays
/// below saturation with headroom for dark counts and noise.
Spectrum make_illumination(IlluminationKind kind, std::uint64_t seed,
                           const IlluminationOptions& options = {});

/// Linear interpolation of a spectrum at `nm` (inside its grid range).
double sample_at(const Spectrum& spectrum, double nm);

struct SyntheticScene {
  DataCube reflectance_truth;  ///< values in [0, 1] on the camera grid
  Spectrum illumination;       ///< relative spectral power on a fine grid
  std::vector<double> vignette;  ///< H x W gains in (0, 1]
  double noise_sigma = 0.0;      ///< camera read noise, counts
  std::optional<std::vector<double>> moisture_truth;  ///< H x W RH %

  void validate() const;
};

/// 1 - strength * rho^2 with rho = 1 at the image corners.
std::vector<double> radial_vignette(std::size_t height, std::size_t width, double strength);

struct RenderOptions {
  double camera_gain = 1.0;  ///< normalized response to unit radiance at t_base
  double spectrometer_gain = 1.0;
  /// Spectrometer read noise in counts; negative scales the camera sigma by D_S / D_I.
  double spectrometer_noise_sigma = -1.0;
};

struct RenderResult {
  DataCube cube;          ///< raw camera counts
  Spectrum spectrometer;  ///< raw spectrometer counts
  DataCube white_truth;   ///< noiseless dark-free normalized white at t_cam
};

/// Forward model. Camera counts are
///   clip(D_I * gain * vignette * reflectance * L(band) * t_cam / t_base + dark + N(0, sigma), 0, D_I)
/// and the spectrometer views the white target (reflectance 1, no vignette).
RenderResult render(const SyntheticScene& scene, const DeviceSpec& camera,
                    const DeviceSpec& spectrometer, double t_cam_ms, double t_spec_ms,
                    std::uint64_t seed, const RenderOptions& options = {});

/// Closed-form normalized white at reflectance 1 for one pixel and band.
double analytic_white(const SyntheticScene& scene, const DeviceSpec& camera, std::size_t row,
                      std::size_t col, std::size_t band, double t_cam_ms,
                      const RenderOptions& options = {});

/// Read-noise sigma (counts) giving `snr_db` relative to the mean white
/// signal of `camera` under `illumination` at its base integration time.
double noise_sigma_for_snr(const DeviceSpec& camera, const Spectrum& illumination,
                           std::span<const double> vignette, double snr_db,
                           const RenderOptions& options = {});

/// Dark reference with a small per-channel offset (fraction of D) plus a
/// seeded per-pixel jitter for cameras.
DarkReference make_dark(const DeviceSpec& device, std::size_t height, std::size_t width,
                        double level_fraction, std::uint64_t seed);

// --- material library ------------------------------------------------------

enum class Material { vegetation, dry_vegetation, soil, sand, water, gray20, gray50, gray80 };

double material_reflectance(Material material, double nm);

/// Tiled patchwork of materials with slight per-pixel texture.
DataCube make_reflectance_scene(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                                std::uint64_t seed, std::size_t tile = 4);

/// Reflectance of sand at relative humidity `rh_percent`: slight albedo
/// loss plus an absorption dip centred on kMoistureDipNm.
inline constexpr double kMoistureDipNm = 1300.0;
inline constexpr double kMaxTestbedRh = 48.1;
double wet_sand_reflectance(double nm, double rh_percent);

/// 3 x 3 cells of `cell_pixels` x `cell_pixels` sand at the given RH levels
/// (row-major, 9 values in [0, 48.1]) on `grid`.
SyntheticScene make_moisture_testbed(std::span<const double> rh_levels, const WavelengthGrid& grid,
                                     std::size_t cell_pixels = 4);

// --- calibration datasets --------------------------------------------------

struct RawSample {
  DataCube cube;          ///< raw counts of the white target
  Spectrum spectrometer;  ///< raw counts
  DataCube white_truth;
  double timestamp = 0.0;
};

struct DatasetOptions {
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t samples = 200;
  double snr_db = 40.0;          ///< infinity for noiseless renders
  double variability = 0.15;
  double min_intensity = 0.1;    ///< low to full sunlight
  double max_intensity = 1.0;
  double vignette_strength = 0.3;
  double start_timestamp = 1.7e9;
  double sample_interval_s = 300.0;
};

/// White-target captures under randomly varying illumination, rendered at
/// the devices' base integration times. Devices must carry dark references.
std::vector<RawSample> make_calibration_dataset(const DeviceSpec& camera,
                                                const DeviceSpec& spectrometer,
                                                const DatasetOptions& options, std::uint64_t seed);

/// Normalizes, dark-subtracts and integration-scales a raw capture and
/// downsamples the spectrometer onto the camera bands.
CalibrationSample to_calibration_sample(const DataCube& raw_cube, const Spectrum& raw_spectrometer,
                                        const DeviceSpec& camera, const DeviceSpec& spectrometer,
                                        double timestamp = 0.0);

}  // namespace hypercal::synth
