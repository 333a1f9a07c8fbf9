#include "hypercal/terrain_indices.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypercal/error.hpp"

namespace hypercal {
namespace {

double normalized_difference_value(double a, double b, bool* flagged = nullptr) {
  const double denom = a + b;
  if (denom == 0.0) {
    if (flagged) *flagged = true;
    return 0.0;
  }
  return (a - b) / denom;
}

}  // namespace

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::size_t find_band(const WavelengthGrid& grid, double nm) {
  if (grid.empty()) throw Error(ErrorCode::invalid_argument, "cube has no bands");
  const std::size_t k = grid.nearest(nm);
  const double center = grid[k];
  double spacing = 0.0;
  if (grid.size() > 1) {
    if (nm >= center) {
      spacing = k + 1 < grid.size() ? grid[k + 1] - center : center - grid[k - 1];
    } else {
      spacing = k > 0 ? center - grid[k - 1] : grid[k + 1] - center;
    }
  }
  if (std::abs(nm - center) > spacing / 2.0) {
    std::ostringstream msg;
    msg << "no band near " << nm << " nm (nearest center " << center << " nm in "
        << grid.describe() << ")";
    throw Error(ErrorCode::span_violation, msg.str());
  }
  return k;
}

IndexMap normalized_difference(const DataCube& cube, double lambda_i_nm, double lambda_j_nm,
                               IndexKind kind) {
  if (cube.unit() != Unit::reflectance) {
    throw Error(ErrorCode::invalid_argument,
                "normalized difference expects a reflectance cube, got " +
                    std::string(to_string(cube.unit())));
  }
  const std::size_t bi = find_band(cube.grid(), lambda_i_nm);
  const std::size_t bj = find_band(cube.grid(), lambda_j_nm);

  IndexMap map;
  map.height = cube.height();
  map.width = cube.width();
  map.kind = kind;
  map.band_pair_nm = {lambda_i_nm, lambda_j_nm};
  map.band_indices = {bi, bj};
  map.values.resize(cube.pixel_count());

  const std::size_t bands = cube.bands();
  const double* data = cube.values().data();
  for (std::size_t p = 0; p < map.values.size(); ++p) {
    bool flagged = false;
    map.values[p] = normalized_difference_value(data[p * bands + bi], data[p * bands + bj], &flagged);
    if (flagged) ++map.flagged_pixels;
  }
  return map;
}

IndexMap ndvi(const DataCube& cube) {
  return normalized_difference(cube, 901.0, 661.0, IndexKind::ndvi);
}

BinaryMask otsu_threshold(std::span<const double> values, std::size_t height, std::size_t width,
                          std::size_t bins) {
  if (values.size() != height * width || values.empty()) {
    throw Error(ErrorCode::shape_mismatch, "Otsu input size does not match H x W");
  }
  if (bins < 2) throw Error(ErrorCode::invalid_argument, "Otsu needs at least 2 bins");
  double lo = values.front();
  double hi = values.front();
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::domain, "Otsu input contains non-finite values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) {
    throw Error(ErrorCode::degenerate, "Otsu input is constant; no class boundary exists");
  }

  // Bin k covers (lo + k*w, lo + (k+1)*w]; the minimum falls in bin 0.
  const double bin_width = (hi - lo) / static_cast<double>(bins);
  auto bin_of = [&](double v) {
    const double pos = std::ceil((v - lo) / bin_width) - 1.0;
    return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
  };
  std::vector<double> hist(bins, 0.0);
  std::vector<std::size_t> assigned(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    assigned[i] = bin_of(values[i]);
    hist[assigned[i]] += 1.0;
  }

  // Between-class variance in bin-index units (an affine image of value
  // space, so the argmax is unchanged). Integer-valued sums stay exact.
  const double total = static_cast<double>(values.size());
  double total_moment = 0.0;
  for (std::size_t k = 0; k < bins; ++k) total_moment += static_cast<double>(k) * hist[k];

  double best = -1.0;
  std::size_t best_k = 0;
  double w0 = 0.0;
  double moment0 = 0.0;
  for (std::size_t k = 0; k + 1 < bins; ++k) {
    w0 += hist[k];
    moment0 += static_cast<double>(k) * hist[k];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double diff = total * moment0 - w0 * total_moment;
    const double between = diff * diff / (w0 * w1);
    if (between > best) {
      best = between;
      best_k = k;
    }
  }

  BinaryMask out;
  out.height = height;
  out.width = width;
  out.bins = bins;
  out.threshold_bin = best_k;
  out.threshold = lo + bin_width * static_cast<double>(best_k + 1);
  out.mask.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.mask[i] = assigned[i] > best_k;
  return out;
}

BinaryMask otsu_threshold(const IndexMap& map, std::size_t bins) {
  return otsu_threshold(map.values, map.height, map.width, bins);
}

double band_pair_score(std::span<const std::vector<double>> wet,
                       std::span<const std::vector<double>> dry, std::size_t i, std::size_t j,
                       BandPairObjective objective) {
  if (objective == BandPairObjective::per_pixel) {
    if (wet.size() != dry.size()) {
      throw Error(ErrorCode::shape_mismatch, "per-pixel band scoring needs equal wet/dry counts");
    }
    double acc = 0.0;
    for (std::size_t p = 0; p < wet.size(); ++p) {
      const double d = normalized_difference_value(wet[p][i], wet[p][j]) -
                       normalized_difference_value(dry[p][i], dry[p][j]);
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  auto mean_band = [](std::span<const std::vector<double>> set, std::size_t band) {
    double s = 0.0;
    for (const auto& spectrum : set) s += spectrum[band];
    return s / static_cast<double>(set.size());
  };
  const double nd_wet = normalized_difference_value(mean_band(wet, i), mean_band(wet, j));
  const double nd_dry = normalized_difference_value(mean_band(dry, i), mean_band(dry, j));
  return std::abs(nd_wet - nd_dry);
}

BandPairResult optimize_band_pair(std::span<const std::vector<double>> wet,
                                  std::span<const std::vector<double>> dry,
                                  const WavelengthGrid& grid, BandPairObjective objective) {
  if (wet.empty() || dry.empty()) {
    throw Error(ErrorCode::invalid_argument, "band-pair optimization needs wet and dry pixels");
  }
  if (grid.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "band-pair optimization needs at least 2 bands");
  }
  for (const auto* set : {&wet, &dry}) {
    for (const auto& spectrum : *set) {
      if (spectrum.size() != grid.size()) {
        throw Error(ErrorCode::grid_mismatch, "pixel spectrum length does not match the grid");
      }
    }
  }
  if (objective == BandPairObjective::per_pixel && wet.size() != dry.size()) {
    throw Error(ErrorCode::shape_mismatch, "per-pixel band scoring needs equal wet/dry counts");
  }

  // The mean spectra are reused for every pair in the default objective.
  std::vector<std::vector<double>> wet_mean;
  std::vector<std::vector<double>> dry_mean;
  std::span<const std::vector<double>> w = wet;
  std::span<const std::vector<double>> d = dry;
  if (objective == BandPairObjective::mean_spectrum) {
    auto mean_of = [&](std::span<const std::vector<double>> set) {
      std::vector<double> m(grid.size(), 0.0);
      for (const auto& s : set) {
        for (std::size_t b = 0; b < m.size(); ++b) m[b] += s[b];
      }
      for (double& v : m) v /= static_cast<double>(set.size());
      return std::vector<std::vector<double>>{m};
    };
    wet_mean = mean_of(wet);
    dry_mean = mean_of(dry);
    w = wet_mean;
    d = dry_mean;
  }

  BandPairResult best;
  best.score = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (i == j) continue;
      const double score = band_pair_score(w, d, i, j, objective);
      if (score > best.score) best = {i, j, grid[i], grid[j], score};
    }
  }
  return best;
}

SmcRegression fit_smc(std::span<const std::pair<double, double>> index_rh) {
  const std::size_t n = index_rh.size();
  if (n < 2) throw Error(ErrorCode::degenerate, "SMC regression needs at least 2 points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : index_rh) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw Error(ErrorCode::domain, "SMC regression input is not finite");
    }
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : index_rh) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) {
    throw Error(ErrorCode::degenerate, "SMC regression needs at least 2 distinct index values");
  }
  SmcRegression reg;
  reg.points = n;
  reg.slope = sxy / sxx;
  reg.intercept = my - reg.slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : index_rh) {
    const double r = y - reg.predict(x);
    sse += r * r;
  }
  reg.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  reg.residual_std = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2)) : 0.0;
  return reg;
}

IndexMap predict_smc(const SmcRegression& regression, const DataCube& cube) {
  IndexMap map = normalized_difference(cube, regression.band_pair_nm.first,
                                       regression.band_pair_nm.second, IndexKind::smc);
  for (double& v : map.values) v = std::clamp(regression.predict(v), 0.0, 100.0);
  map.kind = IndexKind::rh_percent;
  return map;
}

}  // namespace hypercal
