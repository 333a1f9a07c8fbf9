#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hypercal/devices.hpp"
#include "hypercal/error.hpp"
#include "hypercal/spectral_core.hpp"
#include "test_support.hpp"

namespace hypercal {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected hypercal::Error";
  return ErrorCode::invalid_argument;
}

DeviceSpec tiny_device(std::vector<double> centers, std::uint32_t d = 100) {
  DeviceSpec dev;
  dev.name = "tiny";
  dev.kind = DeviceKind::spectrometer;
  dev.grid = WavelengthGrid(std::move(centers));
  dev.saturation = d;
  dev.base_integration_ms = 1.0;
  return dev;
}

// Nearest source channel by linear scan; first minimum wins.
std::vector<std::size_t> brute_force_mapping(const WavelengthGrid& source, const WavelengthGrid& target) {
  std::vector<std::size_t> out;
  for (double t : target.centers()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < source.size(); ++i) {
      if (std::abs(source[i] - t) < std::abs(source[best] - t)) best = i;
    }
    out.push_back(best);
  }
  return out;
}

TEST(WavelengthGrid, RejectsUnorderedOrNonPositive) {
  EXPECT_EQ(code_of([] { WavelengthGrid({500.0, 500.0}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { WavelengthGrid({600.0, 500.0}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { WavelengthGrid({-1.0, 500.0}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { WavelengthGrid(std::vector<double>{}); }), ErrorCode::invalid_argument);
}

TEST(WavelengthGrid, LinspaceEndpointsAndNearestTie) {
  const auto g = WavelengthGrid::linspace(660.0, 900.0, 24);
  EXPECT_EQ(g.size(), 24u);
  EXPECT_DOUBLE_EQ(g.front(), 660.0);
  EXPECT_DOUBLE_EQ(g.back(), 900.0);
  const WavelengthGrid two({500.0, 510.0});
  EXPECT_EQ(two.nearest(505.0), 0u);
  EXPECT_EQ(two.nearest(506.0), 1u);
}

TEST(Normalize, DividesByDAndRejectsSaturation) {
  const auto dev = tiny_device({500.0, 600.0, 700.0});
  const Spectrum raw(dev.grid, {0.0, 50.0, 100.0}, 1.0);
  const Spectrum n = normalize_counts(raw, dev);
  EXPECT_EQ(n.unit(), Unit::normalized);
  EXPECT_DOUBLE_EQ(n[1], 0.5);
  EXPECT_DOUBLE_EQ(n[2], 1.0);
  const Spectrum over(dev.grid, {0.0, 101.0, 50.0}, 1.0);
  EXPECT_EQ(code_of([&] { normalize_counts(over, dev); }), ErrorCode::saturation);
  EXPECT_EQ(code_of([&] { normalize_counts(n, dev); }), ErrorCode::invalid_argument);
}

TEST(Normalize, GridMismatchIsReported) {
  const auto dev = tiny_device({500.0, 600.0});
  const Spectrum raw(WavelengthGrid({500.0, 610.0}), {1.0, 2.0}, 1.0);
  EXPECT_EQ(code_of([&] { normalize_counts(raw, dev); }), ErrorCode::grid_mismatch);
}

TEST(SubtractDark, ClampsAtZeroAndNeedsReference) {
  auto dev = tiny_device({500.0, 600.0});
  const Spectrum n(dev.grid, {0.05, 0.5}, 1.0, Unit::normalized);
  EXPECT_EQ(code_of([&] { subtract_dark(n, dev); }), ErrorCode::configuration);
  dev = dev.with_dark(DarkReference::per_channel({10.0, 10.0}));
  const Spectrum s = subtract_dark(n, dev);
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  EXPECT_DOUBLE_EQ(s[1], 0.4);
}

TEST(DarkReference, FromFramesTakesElementwiseMinimum) {
  const std::vector<std::vector<double>> frames = {{5, 9, 3}, {4, 10, 7}, {6, 8, 1}};
  const auto d = DarkReference::from_frames(frames);
  ASSERT_EQ(d.bands(), 3u);
  EXPECT_EQ(std::vector<double>(d.counts().begin(), d.counts().end()), (std::vector<double>{4, 8, 1}));
}

TEST(DarkReference, PerPixelCubeSubtraction) {
  DeviceSpec cam = tiny_device({500.0, 600.0});
  cam.kind = DeviceKind::hsi_camera;
  cam = cam.with_dark(DarkReference::per_pixel(1, 2, 2, {10, 20, 30, 40}));
  const DataCube n(1, 2, cam.grid, Unit::normalized, 1.0, {0.5, 0.5, 0.5, 0.5});
  const DataCube s = subtract_dark(n, cam);
  EXPECT_DOUBLE_EQ(s.at(0, 0, 1), 0.3);
  EXPECT_DOUBLE_EQ(s.at(0, 1, 1), 0.1);
}

TEST(BandMapping, MatchesBruteForceOnRandomGrids) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto src = testing::uniform_vector(rng, 40, 400.0, 1200.0);
    std::sort(src.begin(), src.end());
    src.erase(std::unique(src.begin(), src.end()), src.end());
    std::uniform_real_distribution<double> pick(src.front(), src.back());
    std::vector<double> tgt(8);
    for (double& t : tgt) t = pick(rng);
    std::sort(tgt.begin(), tgt.end());
    tgt.erase(std::unique(tgt.begin(), tgt.end()), tgt.end());
    const WavelengthGrid source(src), target(tgt);
    const BandMapping m = build_band_mapping(source, target);
    EXPECT_EQ(m.indices, brute_force_mapping(source, target)) << "trial " << trial;
  }
}

TEST(BandMapping, PresetVnirMapsEveryCameraBand) {
  const auto m = build_band_mapping(presets::vnir_spectrometer().grid, presets::vnir_camera().grid);
  ASSERT_EQ(m.indices.size(), 24u);
  for (std::size_t b = 0; b < 24; ++b) {
    EXPECT_LE(std::abs(m.source[m.indices[b]] - m.target[b]), 600.0 / 255.0 / 2.0 + 1e-9);
  }
  EXPECT_EQ(m.calibrated_grid().size(), 24u);
}

TEST(BandMapping, SpanViolationListsUncoveredBands) {
  try {
    build_band_mapping(WavelengthGrid({500.0, 600.0}), WavelengthGrid({450.0, 550.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::span_violation);
    EXPECT_NE(std::string(e.what()).find("450"), std::string::npos);
  }
}

TEST(Downsample, GathersMappedChannels) {
  const WavelengthGrid src({500.0, 510.0, 520.0, 530.0});
  const WavelengthGrid tgt({509.0, 528.0});
  const auto m = build_band_mapping(src, tgt);
  const Spectrum s(src, {1.0, 2.0, 3.0, 4.0}, 2.0, Unit::normalized);
  const Spectrum d = downsample_spectrum(s, m);
  EXPECT_EQ(d.grid(), WavelengthGrid({510.0, 530.0}));
  EXPECT_DOUBLE_EQ(d[0], 2.0);
  EXPECT_DOUBLE_EQ(d[1], 4.0);
}

TEST(IntegrationScale, RatioAndDomain) {
  EXPECT_DOUBLE_EQ(integration_scale(0.5, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(integration_scale(50.0, 25.0), 2.0);
  EXPECT_EQ(code_of([] { integration_scale(1.0, 0.0); }), ErrorCode::domain);
  EXPECT_EQ(code_of([] { integration_scale(-1.0, 1.0); }), ErrorCode::domain);
}

TEST(StackCubes, OrdersByWavelengthAndKeepsPixels) {
  const DataCube swir(1, 2, WavelengthGrid({1300.0}), Unit::reflectance, 1.0, {0.3, 0.4});
  const DataCube vnir(1, 2, WavelengthGrid({700.0, 800.0}), Unit::reflectance, 1.0, {0.1, 0.2, 0.5, 0.6});
  const DataCube s = stack_cubes(swir, vnir);
  EXPECT_EQ(s.grid(), WavelengthGrid({700.0, 800.0, 1300.0}));
  EXPECT_DOUBLE_EQ(s.at(0, 1, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.at(0, 1, 2), 0.4);
  EXPECT_EQ(stack_cubes(s, DataCube(1, 2, WavelengthGrid(), Unit::reflectance, 1.0)), s);
}

TEST(StackCubes, RejectsShapeMismatchAndOverlap) {
  const DataCube a(1, 2, WavelengthGrid({700.0, 800.0}), Unit::reflectance, 1.0);
  const DataCube b(2, 1, WavelengthGrid({1300.0}), Unit::reflectance, 1.0);
  const DataCube c(1, 2, WavelengthGrid({750.0}), Unit::reflectance, 1.0);
  EXPECT_EQ(code_of([&] { stack_cubes(a, b); }), ErrorCode::shape_mismatch);
  EXPECT_EQ(code_of([&] { stack_cubes(a, c); }), ErrorCode::invalid_argument);
}

TEST(Devices, PresetsValidateAndMatchRig) {
  for (const char* name : {"vnir_camera", "swir_camera", "vnir_spectrometer", "swir_spectrometer"}) {
    EXPECT_NO_THROW(presets::by_name(name).validate()) << name;
  }
  EXPECT_EQ(presets::vnir_camera().grid.size(), 24u);
  EXPECT_EQ(presets::swir_camera().grid.size(), 9u);
  EXPECT_EQ(presets::vnir_spectrometer().grid.size(), 256u);
  EXPECT_EQ(presets::swir_spectrometer().grid.size(), 128u);
  EXPECT_DOUBLE_EQ(presets::vnir_camera().base_integration_ms, 0.5);
  EXPECT_DOUBLE_EQ(presets::swir_camera().base_integration_ms, 1.0);
  EXPECT_DOUBLE_EQ(presets::swir_spectrometer().base_integration_ms, 50.0);
  EXPECT_EQ(code_of([] { presets::by_name("nope"); }), ErrorCode::configuration);
}

TEST(Devices, ValidateRejectsBadSpecs) {
  auto dev = tiny_device({500.0, 600.0});
  dev.saturation = 0;
  EXPECT_EQ(code_of([&] { dev.validate(); }), ErrorCode::configuration);
  dev = tiny_device({500.0, 600.0});
  dev.base_integration_ms = 0.0;
  EXPECT_EQ(code_of([&] { dev.validate(); }), ErrorCode::configuration);
  dev = tiny_device({500.0, 600.0});
  dev.dark = DarkReference::per_channel({1.0});
  EXPECT_EQ(code_of([&] { dev.validate(); }), ErrorCode::configuration);
}

}  // namespace
}  // namespace hypercal
