#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypercal {

/// Ordered band-center wavelengths in nanometers.
///
/// A non-empty grid is strictly increasing with positive centers. The
/// default-constructed grid is empty; it only describes the zero-band cube
/// that acts as the neutral element of stack_cubes().
class WavelengthGrid {
 public:
  WavelengthGrid() = default;
  explicit WavelengthGrid(std::vector<double> centers_nm);

  /// `count` evenly spaced centers from `first_nm` to `last_nm` inclusive.
  static WavelengthGrid linspace(double first_nm, double last_nm, std::size_t count);

  std::span<const double> centers() const noexcept { return centers_; }
  std::size_t size() const noexcept { return centers_.size(); }
  bool empty() const noexcept { return centers_.empty(); }
  double operator[](std::size_t i) const { return centers_[i]; }
  double front() const { return centers_.front(); }
  double back() const { return centers_.back(); }

  /// Index of the center closest to `nm`; ties resolve to the lower index.
  std::size_t nearest(double nm) const;

  /// Short human-readable summary, e.g. "24 bands 660-900 nm".
  std::string describe() const;

  friend bool operator==(const WavelengthGrid&, const WavelengthGrid&) = default;

 private:
  std::vector<double> centers_;
};

enum class Unit { digital_counts, normalized, reflectance };

std::string_view to_string(Unit unit) noexcept;
Unit unit_from_string(std::string_view text);

/// A point-spectrometer reading (or any 1-D spectrum on a grid).
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(WavelengthGrid grid, std::vector<double> values, double integration_time_ms,
           Unit unit = Unit::digital_counts);

  const WavelengthGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double integration_time_ms() const noexcept { return integration_time_ms_; }
  Unit unit() const noexcept { return unit_; }

  Spectrum with_values(std::vector<double> values, Unit unit) const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  WavelengthGrid grid_;
  std::vector<double> values_;
  double integration_time_ms_ = 1.0;
  Unit unit_ = Unit::digital_counts;
};

/// H x W x bands array stored band-interleaved-by-pixel: the spectrum of
/// pixel (r, c) is contiguous.
class DataCube {
 public:
  DataCube() = default;
  /// Zero-filled cube when `values` is empty.
  DataCube(std::size_t height, std::size_t width, WavelengthGrid grid, Unit unit,
           double integration_time_ms, std::vector<double> values = {});

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bands() const noexcept { return grid_.size(); }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  const WavelengthGrid& grid() const noexcept { return grid_; }
  Unit unit() const noexcept { return unit_; }
  double integration_time_ms() const noexcept { return integration_time_ms_; }

  std::size_t offset(std::size_t row, std::size_t col, std::size_t band) const noexcept {
    return (row * width_ + col) * grid_.size() + band;
  }
  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return values_[offset(row, col, band)];
  }
  double& at(std::size_t row, std::size_t col, std::size_t band) {
    return values_[offset(row, col, band)];
  }

  std::span<const double> pixel(std::size_t row, std::size_t col) const {
    return {values_.data() + offset(row, col, 0), grid_.size()};
  }
  std::span<double> pixel(std::size_t row, std::size_t col) {
    return {values_.data() + offset(row, col, 0), grid_.size()};
  }
  std::span<const double> pixel(std::size_t index) const {
    return {values_.data() + index * grid_.size(), grid_.size()};
  }
  std::span<double> pixel(std::size_t index) {
    return {values_.data() + index * grid_.size(), grid_.size()};
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Same geometry and grid, new values/unit/integration time.
  DataCube with_values(std::vector<double> values, Unit unit) const;
  DataCube with_integration_time(double integration_time_ms) const;

  friend bool operator==(const DataCube&, const DataCube&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  WavelengthGrid grid_;
  Unit unit_ = Unit::digital_counts;
  double integration_time_ms_ = 1.0;
  std::vector<double> values_;
};

}  // namespace hypercal
