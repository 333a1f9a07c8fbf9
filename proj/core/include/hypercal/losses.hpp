#pragma once

#include <span>

namespace hypercal {

/// Mean of squared differences. Throws on length mismatch.
double loss_mse(std::span<const double> pred, std::span<const double> target);

/// Mean of absolute differences.
double loss_mae(std::span<const double> pred, std::span<const double> target);

struct SpectralAngle {
  double radians = 0.0;
  bool zero_norm = false;  ///< an input had zero Euclidean norm; radians is pi/2
};

/// Angle between two spectra across the wavelength axis, in [0, pi]. The
/// cosine is clamped to [-1, 1]; a zero-norm input yields pi/2 and sets the flag.
SpectralAngle spectral_angle(std::span<const double> pred, std::span<const double> target);

/// spectral_angle(pred, target).radians
double loss_sam(std::span<const double> pred, std::span<const double> target);

/// Adds d(loss_mse)/d(pred) * scale into `grad` and returns the loss.
double accumulate_mse_gradient(std::span<const double> pred, std::span<const double> target,
                               double scale, std::span<double> grad);

/// Adds d(loss_sam)/d(pred) * scale into `grad` and returns the angle. The
/// gradient is zero where the angle is not differentiable (zero norm,
/// parallel or antiparallel inputs).
double accumulate_sam_gradient(std::span<const double> pred, std::span<const double> target,
                               double scale, std::span<double> grad);

}  // namespace hypercal
