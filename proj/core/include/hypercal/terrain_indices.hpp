#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hypercal/spectral_types.hpp"

namespace hypercal {

enum class IndexKind { ndvi, smc, custom_pair, rh_percent };

/// H x W map of a per-pixel index (row-major).
struct IndexMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
  IndexKind kind = IndexKind::custom_pair;
  std::pair<double, double> band_pair_nm{0.0, 0.0};  ///< requested (lambda_i, lambda_j)
  std::pair<std::size_t, std::size_t> band_indices{0, 0};
  std::size_t flagged_pixels = 0;  ///< pixels whose denominator was zero

  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<bool> mask;  ///< value > threshold
  double threshold = 0.0;
  std::size_t threshold_bin = 0;  ///< last histogram bin of the lower class
  std::size_t bins = 0;

  std::size_t count() const;
};

/// Index of the band whose center is nearest `nm`. Throws when `nm` is
/// farther than half the local band spacing from that center.
std::size_t find_band(const WavelengthGrid& grid, double nm);

/// (p_i - p_j) / (p_i + p_j) per pixel. 0/0 yields 0 and is counted in
/// flagged_pixels. Requires a reflectance cube.
IndexMap normalized_difference(const DataCube& cube, double lambda_i_nm, double lambda_j_nm,
                               IndexKind kind = IndexKind::custom_pair);

/// NDVI with the 901/661 nm band pair.
IndexMap ndvi(const DataCube& cube);

/// Binary Otsu threshold over a `bins`-bin histogram spanning [min, max].
/// The threshold is the upper edge of the last lower-class bin, chosen to
/// maximize the between-class variance (first maximum wins).
BinaryMask otsu_threshold(std::span<const double> values, std::size_t height, std::size_t width,
                          std::size_t bins = 256);
BinaryMask otsu_threshold(const IndexMap& map, std::size_t bins = 256);

enum class BandPairObjective {
  mean_spectrum,  ///< normalized differences of the mean wet and mean dry spectra
  per_pixel,      ///< L2 norm over paired pixels (equal counts required)
};

struct BandPairResult {
  std::size_t band_i = 0;
  std::size_t band_j = 0;
  double lambda_i_nm = 0.0;
  double lambda_j_nm = 0.0;
  double score = 0.0;
};

/// Score of one ordered band pair under `objective`.
double band_pair_score(std::span<const std::vector<double>> wet,
                       std::span<const std::vector<double>> dry, std::size_t i, std::size_t j,
                       BandPairObjective objective = BandPairObjective::mean_spectrum);

/// Exhaustive search over ordered pairs i != j for the largest wet/dry
/// normalized-difference separation.
BandPairResult optimize_band_pair(std::span<const std::vector<double>> wet,
                                  std::span<const std::vector<double>> dry,
                                  const WavelengthGrid& grid,
                                  BandPairObjective objective = BandPairObjective::mean_spectrum);

struct SmcRegression {
  double slope = 0.0;      ///< RH % per index unit
  double intercept = 0.0;  ///< RH %
  double r_squared = 0.0;
  double residual_std = 0.0;  ///< sqrt(SSE / (n - 2)); 0 for two points
  std::size_t points = 0;
  std::pair<double, double> band_pair_nm{1300.0, 1119.0};

  double predict(double index) const { return slope * index + intercept; }
};

/// Ordinary least squares line from index value to relative humidity (%).
SmcRegression fit_smc(std::span<const std::pair<double, double>> index_rh);

/// Per-pixel RH % = slope * SMC + intercept, clamped to [0, 100].
IndexMap predict_smc(const SmcRegression& regression, const DataCube& cube);

}  // namespace hypercal
