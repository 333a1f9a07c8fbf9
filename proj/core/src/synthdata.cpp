#include "hypercal/synthdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hypercal/error.hpp"
#include "hypercal/parallel.hpp"
#include "hypercal/spectral_core.hpp"

namespace hypercal::synth {
namespace {

double gauss(double nm, double center, double width) {
  const double z = (nm - center) / width;
  return std::exp(-0.5 * z * z);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double planck_shape(double nm) {
  // Blackbody at 5778 K; constants folded so only the shape matters.
  constexpr double c2_over_t = 1.438777e7 / 5778.0;  // nm
  const double x = nm / 1000.0;
  return 1.0 / (x * x * x * x * x * (std::exp(c2_over_t / nm) - 1.0));
}

struct Notch {
  double center;
  double depth;
  double width;
};

constexpr std::array<Notch, 4> kNotches = {{
    {760.0, 0.30, 4.0},
    {940.0, 0.45, 18.0},
    {kNotch1195Nm, 0.80, 14.0},
    {kNotch1400Nm, 0.92, 30.0},
}};

void require_covered(const WavelengthGrid& inner, const WavelengthGrid& outer,
                     const std::string& what) {
  if (inner.empty()) throw Error(ErrorCode::invalid_argument, what + " grid is empty");
  if (inner.front() < outer.front() || inner.back() > outer.back()) {
    std::ostringstream msg;
    msg << what << " grid " << inner.describe() << " is not covered by the illumination grid "
        << outer.describe();
    throw Error(ErrorCode::span_violation, msg.str());
  }
}

void require_positive_time(double t, const std::string& what) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::domain, what + " integration time must be finite and > 0");
  }
}

}  // namespace

WavelengthGrid default_fine_grid() { return WavelengthGrid::linspace(350.0, 1800.0, 726); }

Spectrum make_illumination(IlluminationKind kind, std::uint64_t seed,
                           const IlluminationOptions& options) {
  const WavelengthGrid& grid = options.grid;
  if (grid.size() < 128) {
    throw Error(ErrorCode::invalid_argument, "illumination grid needs at least 128 channels");
  }
  if (!(options.variability >= 0.0) || options.variability > 0.5) {
    throw Error(ErrorCode::invalid_argument, "illumination variability must lie in [0, 0.5]");
  }
  std::vector<double> values(grid.size(), kIlluminationLevel);
  if (kind == IlluminationKind::flat) return Spectrum(grid, std::move(values), 1.0, Unit::normalized);

  double tilt = 0.0;
  double curvature = 0.0;
  std::array<double, kNotches.size()> depth_scale;
  depth_scale.fill(1.0);
  if (options.variability > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    tilt = options.variability * u(rng);
    curvature = 0.5 * options.variability * u(rng);
    for (double& s : depth_scale) s = 1.0 + options.variability * u(rng);
  }

  // Planck peak normalization is taken from the nominal curve so that
  // variation draws stay comparable across seeds.
  double peak = 0.0;
  for (double nm : grid.centers()) peak = std::max(peak, planck_shape(nm));
  const double mid = 0.5 * (grid.front() + grid.back());
  const double half = 0.5 * (grid.back() - grid.front());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double nm = grid[i];
    const double x = (nm - mid) / half;
    double v = kIlluminationLevel * planck_shape(nm) / peak;
    v *= 1.0 + tilt * x + curvature * (1.5 * x * x - 0.5);
    for (std::size_t k = 0; k < kNotches.size(); ++k) {
      const double depth = std::min(0.98, kNotches[k].depth * depth_scale[k]);
      v *= 1.0 - depth * gauss(nm, kNotches[k].center, kNotches[k].width);
    }
    if (kind == IlluminationKind::dim) v *= kDimFactor;
    values[i] = v;
  }
  return Spectrum(grid, std::move(values), 1.0, Unit::normalized);
}

double sample_at(const Spectrum& spectrum, double nm) {
  const auto centers = spectrum.grid().centers();
  if (centers.empty() || nm < centers.front() || nm > centers.back()) {
    throw Error(ErrorCode::span_violation, "wavelength " + std::to_string(nm) +
                                               " nm outside " + spectrum.grid().describe());
  }
  const auto it = std::lower_bound(centers.begin(), centers.end(), nm);
  const auto hi = static_cast<std::size_t>(it - centers.begin());
  if (centers[hi] == nm || hi == 0) return spectrum[hi];
  const std::size_t lo = hi - 1;
  const double f = (nm - centers[lo]) / (centers[hi] - centers[lo]);
  return spectrum[lo] + f * (spectrum[hi] - spectrum[lo]);
}

void SyntheticScene::validate() const {
  const std::size_t pixels = reflectance_truth.pixel_count();
  if (reflectance_truth.unit() != Unit::reflectance) {
    throw Error(ErrorCode::invalid_argument, "scene reflectance_truth must be a reflectance cube");
  }
  for (double v : reflectance_truth.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::domain, "scene reflectance must lie in [0, 1]");
    }
  }
  if (vignette.size() != pixels) {
    throw Error(ErrorCode::shape_mismatch, "vignette map does not match the scene size");
  }
  for (double v : vignette) {
    if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorCode::domain, "vignette gains must lie in (0, 1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::domain, "noise sigma must be finite and >= 0");
  }
  if (moisture_truth && moisture_truth->size() != pixels) {
    throw Error(ErrorCode::shape_mismatch, "moisture map does not match the scene size");
  }
  for (double v : illumination.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::domain, "illumination must be positive and finite");
    }
  }
}

std::vector<double> radial_vignette(std::size_t height, std::size_t width, double strength) {
  if (!(strength >= 0.0 && strength < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "vignette strength must lie in [0, 1)");
  }
  std::vector<double> out(height * width, 1.0);
  const double rc = 0.5 * static_cast<double>(height - 1);
  const double cc = 0.5 * static_cast<double>(width - 1);
  const double corner = rc * rc + cc * cc;
  if (corner == 0.0) return out;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double dr = static_cast<double>(r) - rc;
      const double dc = static_cast<double>(c) - cc;
      out[r * width + c] = 1.0 - strength * (dr * dr + dc * dc) / corner;
    }
  }
  return out;
}

RenderResult render(const SyntheticScene& scene, const DeviceSpec& camera,
                    const DeviceSpec& spectrometer, double t_cam_ms, double t_spec_ms,
                    std::uint64_t seed, const RenderOptions& options) {
  scene.validate();
  camera.validate();
  spectrometer.validate();
  require_positive_time(t_cam_ms, "camera");
  require_positive_time(t_spec_ms, "spectrometer");
  const WavelengthGrid& illum_grid = scene.illumination.grid();
  require_covered(camera.grid, illum_grid, "camera");
  require_covered(spectrometer.grid, illum_grid, "spectrometer");
  if (!(scene.reflectance_truth.grid() == camera.grid)) {
    throw Error(ErrorCode::grid_mismatch, "scene reflectance grid " +
                                              scene.reflectance_truth.grid().describe() +
                                              " differs from camera grid " + camera.grid.describe());
  }
  const std::size_t h = scene.reflectance_truth.height();
  const std::size_t w = scene.reflectance_truth.width();
  const std::size_t bands = camera.grid.size();
  if (camera.dark && camera.dark->is_per_pixel() &&
      (camera.dark->height() != h || camera.dark->width() != w)) {
    throw Error(ErrorCode::configuration, "camera dark reference does not match the scene size");
  }

  std::vector<double> cam_illum(bands);
  for (std::size_t b = 0; b < bands; ++b) cam_illum[b] = sample_at(scene.illumination, camera.grid[b]);
  const double cam_time = t_cam_ms / camera.base_integration_ms;
  const double d_cam = static_cast<double>(camera.saturation);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> white(h * w * bands);
  std::vector<double> counts(h * w * bands);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double vig = scene.vignette[r * w + c];
      for (std::size_t b = 0; b < bands; ++b) {
        const std::size_t i = (r * w + c) * bands + b;
        white[i] = options.camera_gain * vig * cam_illum[b] * cam_time;
        double v = d_cam * white[i] * scene.reflectance_truth.values()[i];
        if (camera.dark) v += camera.dark->at(r, c, b);
        if (scene.noise_sigma > 0.0) v += scene.noise_sigma * normal(rng);
        counts[i] = std::clamp(v, 0.0, d_cam);
      }
    }
  }

  const double d_spec = static_cast<double>(spectrometer.saturation);
  const double spec_sigma = options.spectrometer_noise_sigma >= 0.0
                                ? options.spectrometer_noise_sigma
                                : scene.noise_sigma * d_spec / d_cam;
  const double spec_time = t_spec_ms / spectrometer.base_integration_ms;
  std::vector<double> spec(spectrometer.grid.size());
  for (std::size_t a = 0; a < spec.size(); ++a) {
    double v = d_spec * options.spectrometer_gain *
               sample_at(scene.illumination, spectrometer.grid[a]) * spec_time;
    if (spectrometer.dark) v += spectrometer.dark->at(0, 0, a);
    if (spec_sigma > 0.0) v += spec_sigma * normal(rng);
    spec[a] = std::clamp(v, 0.0, d_spec);
  }

  RenderResult out;
  out.cube = DataCube(h, w, camera.grid, Unit::digital_counts, t_cam_ms, std::move(counts));
  out.spectrometer = Spectrum(spectrometer.grid, std::move(spec), t_spec_ms, Unit::digital_counts);
  out.white_truth = DataCube(h, w, camera.grid, Unit::normalized, t_cam_ms, std::move(white));
  return out;
}

double analytic_white(const SyntheticScene& scene, const DeviceSpec& camera, std::size_t row,
                      std::size_t col, std::size_t band, double t_cam_ms,
                      const RenderOptions& options) {
  const std::size_t w = scene.reflectance_truth.width();
  return options.camera_gain * scene.vignette.at(row * w + col) *
         sample_at(scene.illumination, camera.grid[band]) * (t_cam_ms / camera.base_integration_ms);
}

double noise_sigma_for_snr(const DeviceSpec& camera, const Spectrum& illumination,
                           std::span<const double> vignette, double snr_db,
                           const RenderOptions& options) {
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::domain, "SNR must be finite or +inf");
  if (vignette.empty()) throw Error(ErrorCode::invalid_argument, "vignette map is empty");
  double mean_illum = 0.0;
  for (double nm : camera.grid.centers()) mean_illum += sample_at(illumination, nm);
  mean_illum /= static_cast<double>(camera.grid.size());
  double mean_vig = 0.0;
  for (double v : vignette) mean_vig += v;
  mean_vig /= static_cast<double>(vignette.size());
  const double mean_counts =
      static_cast<double>(camera.saturation) * options.camera_gain * mean_illum * mean_vig;
  return mean_counts / std::pow(10.0, snr_db / 20.0);
}

DarkReference make_dark(const DeviceSpec& device, std::size_t height, std::size_t width,
                        double level_fraction, std::uint64_t seed) {
  if (!(level_fraction >= 0.0 && level_fraction < 0.5)) {
    throw Error(ErrorCode::invalid_argument, "dark level must lie in [0, 0.5) of D");
  }
  const double base = level_fraction * static_cast<double>(device.saturation);
  const std::size_t bands = device.grid.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  std::vector<double> channel(bands);
  for (double& v : channel) v = base * jitter(rng);
  if (device.kind == DeviceKind::spectrometer) return DarkReference::per_channel(std::move(channel));

  std::uniform_real_distribution<double> pixel_jitter(0.95, 1.05);
  std::vector<double> counts(height * width * bands);
  for (std::size_t p = 0; p < height * width; ++p) {
    for (std::size_t b = 0; b < bands; ++b) counts[p * bands + b] = channel[b] * pixel_jitter(rng);
  }
  return DarkReference::per_pixel(height, width, bands, std::move(counts));
}

double material_reflectance(Material material, double nm) {
  const double ramp = (nm - 400.0) / 1400.0;
  double r = 0.0;
  switch (material) {
    case Material::vegetation:
      r = 0.04 + 0.03 * gauss(nm, 550.0, 35.0) + 0.44 * sigmoid((nm - 715.0) / 12.0) -
          0.05 * gauss(nm, 970.0, 25.0) - 0.08 * gauss(nm, 1200.0, 30.0) -
          0.22 * gauss(nm, 1450.0, 45.0) - 0.10 * sigmoid((nm - 1350.0) / 80.0);
      break;
    case Material::dry_vegetation:
      r = 0.10 + 0.20 * sigmoid((nm - 700.0) / 30.0) + 0.05 * ramp - 0.10 * gauss(nm, 1450.0, 45.0);
      break;
    case Material::soil:
      r = 0.12 + 0.20 * ramp - 0.04 * gauss(nm, 1400.0, 40.0);
      break;
    case Material::sand:
      r = 0.30 + 0.15 * ramp - 0.02 * gauss(nm, 1400.0, 40.0);
      break;
    case Material::water:
      r = 0.02 + 0.05 * (1.0 - sigmoid((nm - 650.0) / 40.0));
      break;
    case Material::gray20: r = 0.2; break;
    case Material::gray50: r = 0.5; break;
    case Material::gray80: r = 0.8; break;
  }
  return std::clamp(r, 0.01, 0.95);
}

DataCube make_reflectance_scene(std::size_t height, std::size_t width, const WavelengthGrid& grid,
                                std::uint64_t seed, std::size_t tile) {
  if (tile == 0) throw Error(ErrorCode::invalid_argument, "tile size must be >= 1");
  const std::size_t bands = grid.size();
  constexpr std::array<Material, 8> kAll = {Material::vegetation, Material::dry_vegetation,
                                            Material::soil,       Material::sand,
                                            Material::water,      Material::gray20,
                                            Material::gray50,     Material::gray80};
  std::vector<std::vector<double>> library;
  for (Material m : kAll) {
    std::vector<double> spectrum(bands);
    for (std::size_t b = 0; b < bands; ++b) spectrum[b] = material_reflectance(m, grid[b]);
    library.push_back(std::move(spectrum));
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, kAll.size() - 1);
  std::uniform_real_distribution<double> texture(0.97, 1.03);
  const std::size_t tiles_h = (height + tile - 1) / tile;
  const std::size_t tiles_w = (width + tile - 1) / tile;
  std::vector<std::size_t> tile_material(tiles_h * tiles_w);
  for (auto& m : tile_material) m = pick(rng);

  std::vector<double> values(height * width * bands);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const auto& spectrum = library[tile_material[(r / tile) * tiles_w + c / tile]];
      const double t = texture(rng);
      for (std::size_t b = 0; b < bands; ++b) {
        values[(r * width + c) * bands + b] = std::min(1.0, spectrum[b] * t);
      }
    }
  }
  return DataCube(height, width, grid, Unit::reflectance, 1.0, std::move(values));
}

double wet_sand_reflectance(double nm, double rh_percent) {
  const double f = rh_percent / kMaxTestbedRh;
  return material_reflectance(Material::sand, nm) * (1.0 - 0.05 * f) *
         (1.0 - 0.35 * f * gauss(nm, kMoistureDipNm, 25.0));
}

SyntheticScene make_moisture_testbed(std::span<const double> rh_levels, const WavelengthGrid& grid,
                                     std::size_t cell_pixels) {
  if (rh_levels.size() != 9) {
    throw Error(ErrorCode::invalid_argument,
                "moisture testbed needs 9 RH levels, got " + std::to_string(rh_levels.size()));
  }
  for (double rh : rh_levels) {
    if (!(rh >= 0.0 && rh <= kMaxTestbedRh)) {
      throw Error(ErrorCode::domain,
                  "RH level " + std::to_string(rh) + "% outside [0, 48.1]%");
    }
  }
  if (cell_pixels == 0) throw Error(ErrorCode::invalid_argument, "cell size must be >= 1");
  const std::size_t side = 3 * cell_pixels;
  const std::size_t bands = grid.size();
  std::vector<double> values(side * side * bands);
  std::vector<double> moisture(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double rh = rh_levels[(r / cell_pixels) * 3 + c / cell_pixels];
      moisture[r * side + c] = rh;
      for (std::size_t b = 0; b < bands; ++b) {
        values[(r * side + c) * bands + b] = wet_sand_reflectance(grid[b], rh);
      }
    }
  }
  SyntheticScene scene;
  scene.reflectance_truth = DataCube(side, side, grid, Unit::reflectance, 1.0, std::move(values));
  scene.illumination = make_illumination(IlluminationKind::solar_like, 0);
  scene.vignette.assign(side * side, 1.0);
  scene.moisture_truth = std::move(moisture);
  return scene;
}

std::vector<RawSample> make_calibration_dataset(const DeviceSpec& camera,
                                                const DeviceSpec& spectrometer,
                                                const DatasetOptions& options, std::uint64_t seed) {
  if (!camera.dark || !spectrometer.dark) {
    throw Error(ErrorCode::configuration, "dataset devices need dark references");
  }
  if (options.samples == 0 || options.height == 0 || options.width == 0) {
    throw Error(ErrorCode::invalid_argument, "dataset needs at least one sample and pixel");
  }
  if (!(options.min_intensity > 0.0 && options.min_intensity <= options.max_intensity)) {
    throw Error(ErrorCode::invalid_argument, "intensity range must satisfy 0 < min <= max");
  }
  SyntheticScene scene;
  scene.reflectance_truth =
      DataCube(options.height, options.width, camera.grid, Unit::reflectance, 1.0,
               std::vector<double>(options.height * options.width * camera.grid.size(), 1.0));
  scene.vignette = radial_vignette(options.height, options.width, options.vignette_strength);
  scene.noise_sigma = noise_sigma_for_snr(camera, make_illumination(IlluminationKind::solar_like, 0),
                                          scene.vignette, options.snr_db);

  std::vector<RawSample> out(options.samples);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> intensity(options.min_intensity, options.max_intensity);
  for (std::size_t i = 0; i < options.samples; ++i) {
    const std::uint64_t sample_seed = mix64(seed ^ mix64(i));
    Spectrum illum = make_illumination(IlluminationKind::solar_like, sample_seed,
                                       {default_fine_grid(), options.variability});
    const double a = intensity(rng);
    for (double& v : illum.values()) v *= a;
    scene.illumination = std::move(illum);
    RenderResult rendered = render(scene, camera, spectrometer, camera.base_integration_ms,
                                   spectrometer.base_integration_ms, mix64(sample_seed));
    out[i].cube = std::move(rendered.cube);
    out[i].spectrometer = std::move(rendered.spectrometer);
    out[i].white_truth = std::move(rendered.white_truth);
    out[i].timestamp = options.start_timestamp + options.sample_interval_s * static_cast<double>(i);
  }
  return out;
}

CalibrationSample to_calibration_sample(const DataCube& raw_cube, const Spectrum& raw_spectrometer,
                                        const DeviceSpec& camera, const DeviceSpec& spectrometer,
                                        double timestamp) {
  const DataCube cube = subtract_dark(normalize_counts(raw_cube, camera), camera);
  const double cube_scale =
      integration_scale(camera.base_integration_ms, raw_cube.integration_time_ms());
  std::vector<double> cube_values(cube.values().begin(), cube.values().end());
  for (double& v : cube_values) v *= cube_scale;

  const Spectrum spec = subtract_dark(normalize_counts(raw_spectrometer, spectrometer), spectrometer);
  const double spec_scale =
      integration_scale(spectrometer.base_integration_ms, raw_spectrometer.integration_time_ms());
  std::vector<double> spec_values(spec.values().begin(), spec.values().end());
  for (double& v : spec_values) v *= spec_scale;
  const Spectrum at_base(spec.grid(), std::move(spec_values), spectrometer.base_integration_ms,
                         Unit::normalized);

  CalibrationSample sample;
  sample.spectrometer = downsample_spectrum(at_base, build_band_mapping(spectrometer.grid, camera.grid));
  sample.cube = DataCube(cube.height(), cube.width(), cube.grid(), Unit::normalized,
                         camera.base_integration_ms, std::move(cube_values));
  sample.timestamp = timestamp;
  return sample;
}

}  // namespace hypercal::synth
