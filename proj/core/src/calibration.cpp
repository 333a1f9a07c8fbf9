#include "hypercal/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "hypercal/error.hpp"

namespace hypercal {

CalibrationContext CalibrationContext::make(DeviceSpec camera, DeviceSpec spectrometer,
                                            std::shared_ptr<const PixelModelBank> bank) {
  CalibrationContext ctx;
  ctx.mapping = build_band_mapping(spectrometer.grid, camera.grid);
  ctx.camera = std::move(camera);
  ctx.spectrometer = std::move(spectrometer);
  ctx.bank = std::move(bank);
  ctx.validate();
  return ctx;
}

void CalibrationContext::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::configuration, what); };
  if (!bank) fail("calibration context has no model bank");
  camera.validate();
  spectrometer.validate();
  if (!camera.dark) fail("camera '" + camera.name + "' has no dark reference");
  if (!spectrometer.dark) fail("spectrometer '" + spectrometer.name + "' has no dark reference");
  if (bank->bands() != camera.grid.size()) {
    fail("model bank has " + std::to_string(bank->bands()) + " bands, camera has " +
         std::to_string(camera.grid.size()));
  }
  if (!(mapping.target == camera.grid) || !(mapping.source == spectrometer.grid)) {
    fail("band mapping does not connect the spectrometer grid to the camera grid");
  }
  if (!(clip_max > 0.0) || !(epsilon_denom > 0.0)) {
    fail("clip_max and epsilon_denom must be positive");
  }
}

Spectrum prepare_spectrometer(const CalibrationContext& ctx, const Spectrum& raw_spec) {
  const double d = static_cast<double>(ctx.spectrometer.saturation);
  for (std::size_t i = 0; i < raw_spec.size(); ++i) {
    if (raw_spec[i] >= d) {
      throw Error(ErrorCode::saturation,
                  "spectrometer '" + ctx.spectrometer.name + "' saturated at channel " +
                      std::to_string(i) + " (" + std::to_string(raw_spec.grid()[i]) +
                      " nm); white reference is invalid");
    }
  }
  const Spectrum clean = subtract_dark(normalize_counts(raw_spec, ctx.spectrometer), ctx.spectrometer);
  const double scale =
      integration_scale(ctx.spectrometer.base_integration_ms, raw_spec.integration_time_ms());
  std::vector<double> scaled(clean.values().begin(), clean.values().end());
  for (double& v : scaled) v *= scale;
  const Spectrum at_base(clean.grid(), std::move(scaled), ctx.spectrometer.base_integration_ms,
                         Unit::normalized);
  return downsample_spectrum(at_base, ctx.mapping);
}

DataCube white_reference(const CalibrationContext& ctx, const Spectrum& raw_spec) {
  ctx.validate();
  return predict(*ctx.bank, prepare_spectrometer(ctx, raw_spec), ctx.camera.grid)
      .with_integration_time(ctx.camera.base_integration_ms);
}

DataCube calibrate_unclipped(const CalibrationContext& ctx, const DataCube& raw_cube,
                             const Spectrum& raw_spec) {
  const DataCube white = white_reference(ctx, raw_spec);
  if (raw_cube.height() != white.height() || raw_cube.width() != white.width()) {
    throw Error(ErrorCode::shape_mismatch,
                "raw cube is " + std::to_string(raw_cube.height()) + "x" +
                    std::to_string(raw_cube.width()) + " but the model bank covers " +
                    std::to_string(white.height()) + "x" + std::to_string(white.width()));
  }
  const DataCube norm = normalize_counts(raw_cube, ctx.camera);
  const double d = static_cast<double>(ctx.camera.saturation);
  const double scale = integration_scale(ctx.camera.base_integration_ms, raw_cube.integration_time_ms());
  const DarkReference& dark = *ctx.camera.dark;
  if (dark.is_per_pixel() && (dark.height() != raw_cube.height() || dark.width() != raw_cube.width())) {
    throw Error(ErrorCode::configuration, "camera dark reference does not match the cube shape");
  }
  const bool literal = ctx.dark_denominator == DarkDenominator::literal;

  std::vector<double> out(norm.values().size());
  for (std::size_t r = 0; r < norm.height(); ++r) {
    for (std::size_t c = 0; c < norm.width(); ++c) {
      for (std::size_t b = 0; b < norm.bands(); ++b) {
        const std::size_t i = norm.offset(r, c, b);
        const double dark_scaled = dark.at(r, c, b) / d * scale;
        const double numerator = std::max(0.0, norm.values()[i] * scale - dark_scaled);
        double denominator = white.values()[i];
        if (literal) denominator -= dark_scaled;
        out[i] = numerator / std::max(denominator, ctx.epsilon_denom);
      }
    }
  }
  return DataCube(raw_cube.height(), raw_cube.width(), raw_cube.grid(), Unit::reflectance,
                  raw_cube.integration_time_ms(), std::move(out));
}

DataCube calibrate(const CalibrationContext& ctx, const DataCube& raw_cube,
                   const Spectrum& raw_spec) {
  DataCube cube = calibrate_unclipped(ctx, raw_cube, raw_spec);
  for (double& v : cube.values()) v = std::clamp(v, 0.0, ctx.clip_max);
  return cube;
}

DataCube calibrate_min_max(const DataCube& signal, const DataCube& white, const DataCube& dark,
                           double clip_max, double epsilon_denom) {
  auto same_shape = [&](const DataCube& other) {
    return other.height() == signal.height() && other.width() == signal.width() &&
           other.grid() == signal.grid() && other.unit() == signal.unit();
  };
  if (!same_shape(white) || !same_shape(dark)) {
    throw Error(ErrorCode::shape_mismatch,
                "min-max calibration needs signal, white and dark cubes of identical shape and unit");
  }
  std::vector<double> out(signal.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double numerator = signal.values()[i] - dark.values()[i];
    const double denominator = std::max(white.values()[i] - dark.values()[i], epsilon_denom);
    out[i] = std::clamp(numerator / denominator, 0.0, clip_max);
  }
  return signal.with_values(std::move(out), Unit::reflectance);
}

}  // namespace hypercal
