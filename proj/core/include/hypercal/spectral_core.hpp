#pragma once

#include <cstddef>
#include <vector>

#include "hypercal/devices.hpp"
#include "hypercal/spectral_types.hpp"

namespace hypercal {

/// Nearest-wavelength alignment of a camera grid onto a spectrometer grid.
struct BandMapping {
  WavelengthGrid source;            ///< spectrometer grid
  WavelengthGrid target;            ///< camera grid
  std::vector<std::size_t> indices; ///< indices[b]: source channel nearest target band b

  /// Source wavelengths at the selected indices.
  WavelengthGrid calibrated_grid() const;

  friend bool operator==(const BandMapping&, const BandMapping&) = default;
};

/// raw / D. Requires digital counts on the device grid; values above D are
/// reported as a saturation error listing the offending positions.
Spectrum normalize_counts(const Spectrum& raw, const DeviceSpec& device);
DataCube normalize_counts(const DataCube& raw, const DeviceSpec& device);

/// max(0, x - min(dark)/D) on normalized data.
Spectrum subtract_dark(const Spectrum& normalized, const DeviceSpec& device);
DataCube subtract_dark(const DataCube& normalized, const DeviceSpec& device);

/// For each target band the nearest source channel, ties to the lower index.
/// The source grid must span [target.front(), target.back()].
BandMapping build_band_mapping(const WavelengthGrid& source, const WavelengthGrid& target);

/// Gathers the mapped channels; the result lives on the calibrated grid.
Spectrum downsample_spectrum(const Spectrum& spectrum, const BandMapping& mapping);

/// t_base / t_new.
double integration_scale(double base_ms, double new_ms);

/// Concatenates two pre-registered cubes along the band axis, ordered by
/// wavelength. A zero-band cube is the identity.
DataCube stack_cubes(const DataCube& a, const DataCube& b);

}  // namespace hypercal
