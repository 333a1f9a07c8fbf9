#pragma once

#include <memory>

#include "hypercal/spectral_core.hpp"
#include "hypercal/whiteref_model.hpp"

namespace hypercal {

/// How the camera dark term enters the denominator of the joint calibration.
enum class DarkDenominator {
  /// The bank predicts a dark-subtracted white (it is trained on
  /// dark-subtracted cubes), so the denominator is the prediction itself.
  model_is_dark_free,
  /// Subtract the integration-scaled camera dark from the prediction again,
  /// exactly as the joint calibration formula is printed.
  literal,
};

struct CalibrationContext {
  DeviceSpec camera;
  DeviceSpec spectrometer;
  BandMapping mapping;
  std::shared_ptr<const PixelModelBank> bank;
  double clip_max = 1.5;
  double epsilon_denom = 1e-6;
  DarkDenominator dark_denominator = DarkDenominator::model_is_dark_free;

  /// Builds the band mapping from the device grids and validates.
  static CalibrationContext make(DeviceSpec camera, DeviceSpec spectrometer,
                                 std::shared_ptr<const PixelModelBank> bank);

  /// Restricts reflectance to [0, 1].
  CalibrationContext& strict_unit_range() {
    clip_max = 1.0;
    return *this;
  }

  /// Throws Error(configuration) on a missing bank, missing dark references,
  /// or inconsistent grids/band counts.
  void validate() const;
};

/// Normalized, dark-subtracted, integration-scaled spectrometer reading on
/// the calibrated grid: the model input. Refuses saturated readings.
Spectrum prepare_spectrometer(const CalibrationContext& ctx, const Spectrum& raw_spec);

/// White-reference cube (camera grid, base integration time) predicted from
/// a raw spectrometer reading.
DataCube white_reference(const CalibrationContext& ctx, const Spectrum& raw_spec);

/// Reflectance before clipping; the denominator is floored at epsilon_denom.
DataCube calibrate_unclipped(const CalibrationContext& ctx, const DataCube& raw_cube,
                             const Spectrum& raw_spec);

/// Raw camera cube + synchronized raw spectrometer reading -> reflectance
/// cube clipped to [0, clip_max].
DataCube calibrate(const CalibrationContext& ctx, const DataCube& raw_cube,
                   const Spectrum& raw_spec);

/// (signal - dark) / (white - dark) with the same floor and clip policy.
/// All three cubes must share shape and unit.
DataCube calibrate_min_max(const DataCube& signal, const DataCube& white, const DataCube& dark,
                           double clip_max = 1.5, double epsilon_denom = 1e-6);

}  // namespace hypercal
