#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "hypercal/calibration.hpp"
#include "hypercal/error.hpp"
#include "test_support.hpp"

namespace hypercal {
namespace {

constexpr double kD = 1000.0;

DeviceSpec make_device(DeviceKind kind, std::vector<double> centers, std::vector<double> dark) {
  DeviceSpec dev;
  dev.name = kind == DeviceKind::hsi_camera ? "cam" : "spec";
  dev.kind = kind;
  dev.grid = WavelengthGrid(std::move(centers));
  dev.saturation = static_cast<std::uint32_t>(kD);
  dev.base_integration_ms = 1.0;
  return dev.with_dark(DarkReference::per_channel(std::move(dark)));
}

// Identity MLR bank on an H x W camera with `bands` bands.
std::shared_ptr<PixelModelBank> identity_bank(std::size_t h, std::size_t w, std::size_t bands,
                                              double gain = 1.0) {
  const std::size_t block = PixelModelBank::block_size(ModelKind::mlr, bands);
  std::vector<double> params(h * w * block, 0.0);
  for (std::size_t p = 0; p < h * w; ++p) {
    for (std::size_t b = 0; b < bands; ++b) params[p * block + b * bands + b] = gain;
  }
  return std::make_shared<PixelModelBank>(ModelKind::mlr, h, w, bands, std::move(params));
}

struct Fixture {
  DeviceSpec camera = make_device(DeviceKind::hsi_camera, {600.0, 700.0}, {20.0, 40.0});
  DeviceSpec spectrometer = make_device(DeviceKind::spectrometer, {600.0, 650.0, 700.0}, {10.0, 10.0, 30.0});
  CalibrationContext ctx = CalibrationContext::make(camera, spectrometer, identity_bank(1, 2, 2));

  Spectrum spec(std::vector<double> counts, double t = 1.0) const {
    return Spectrum(spectrometer.grid, std::move(counts), t);
  }
  DataCube cube(std::vector<double> counts, double t = 1.0) const {
    return DataCube(1, 2, camera.grid, Unit::digital_counts, t, std::move(counts));
  }
};

TEST(Calibration, HandComputedReflectanceWithIdentityBank) {
  const Fixture f;
  const Spectrum s = f.spec({510.0, 999.0, 630.0});
  const DataCube c = f.cube({260.0, 340.0, 510.0, 640.0});
  const DataCube r = calibrate(f.ctx, c, s);
  // white(band) = (spec - spec_dark)/D at the nearest channel; here 600 and 700 nm.
  const double w0 = (510.0 - 10.0) / kD, w1 = (630.0 - 30.0) / kD;
  EXPECT_NEAR(r.at(0, 0, 0), ((260.0 - 20.0) / kD) / w0, 1e-14);
  EXPECT_NEAR(r.at(0, 0, 1), ((340.0 - 40.0) / kD) / w1, 1e-14);
  EXPECT_NEAR(r.at(0, 1, 0), ((510.0 - 20.0) / kD) / w0, 1e-14);
  EXPECT_NEAR(r.at(0, 1, 1), ((640.0 - 40.0) / kD) / w1, 1e-14);
  EXPECT_EQ(r.unit(), Unit::reflectance);
}

TEST(Calibration, WhiteSignalGivesOneAndDarkGivesZero) {
  const Fixture f;
  const Spectrum s = f.spec({410.0, 500.0, 530.0});
  // Camera sees exactly what the spectrometer sees, dark-subtracted: reflectance 1.
  const DataCube white = f.cube({420.0, 540.0, 420.0, 540.0});
  const DataCube r1 = calibrate(f.ctx, white, s);
  for (double v : r1.values()) EXPECT_NEAR(v, 1.0, 1e-14);
  const DataCube half = f.cube({220.0, 290.0, 220.0, 290.0});
  const DataCube r2 = calibrate(f.ctx, half, s);
  for (double v : r2.values()) EXPECT_NEAR(v, 0.5, 1e-14);
  const DataCube dark = f.cube({20.0, 40.0, 20.0, 40.0});
  const DataCube r3 = calibrate(f.ctx, dark, s);
  for (double v : r3.values()) EXPECT_EQ(v, 0.0);
  const DataCube below_dark = f.cube({5.0, 0.0, 0.0, 1.0});
  const DataCube r4 = calibrate(f.ctx, below_dark, s);
  for (double v : r4.values()) EXPECT_EQ(v, 0.0);
}

TEST(Calibration, IntegrationTimesCancelWhenSignalScales) {
  const Fixture f;
  // Doubling both integration times doubles the signal; darks stay put.
  const Spectrum s1 = f.spec({210.0, 300.0, 330.0}, 1.0);
  const Spectrum s2 = f.spec({410.0, 600.0, 630.0}, 2.0);
  const DataCube c1 = f.cube({120.0, 190.0, 70.0, 115.0}, 1.0);
  const DataCube c2 = f.cube({220.0, 340.0, 120.0, 190.0}, 2.0);
  const DataCube r1 = calibrate(f.ctx, c1, s1);
  const DataCube r2 = calibrate(f.ctx, c2, s2);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r1.values()[i], r2.values()[i], 1e-14);
}

TEST(Calibration, LiteralDenominatorSubtractsDarkAgain) {
  Fixture f;
  f.ctx.dark_denominator = DarkDenominator::literal;
  const Spectrum s = f.spec({510.0, 999.0, 630.0});
  const DataCube c = f.cube({260.0, 340.0, 510.0, 640.0});
  const DataCube r = calibrate_unclipped(f.ctx, c, s);
  const double w0 = (510.0 - 10.0) / kD - 20.0 / kD;
  EXPECT_NEAR(r.at(0, 0, 0), ((260.0 - 20.0) / kD) / w0, 1e-14);
}

TEST(Calibration, ScaleEquivarianceOfBankGain) {
  Fixture f;
  const Spectrum s = f.spec({510.0, 999.0, 630.0});
  const DataCube c = f.cube({260.0, 340.0, 510.0, 640.0});
  const DataCube base = calibrate_unclipped(f.ctx, c, s);
  f.ctx.bank = identity_bank(1, 2, 2, 2.0);
  const DataCube halved = calibrate_unclipped(f.ctx, c, s);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(halved.values()[i], base.values()[i] / 2.0, 1e-14);
}

TEST(Calibration, MonotoneInSignalAndFiniteOnFuzzedInput) {
  const Fixture f;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kD - 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Spectrum s = f.spec({u(rng), u(rng), u(rng)});
    std::vector<double> counts = {u(rng), u(rng), u(rng), u(rng)};
    const DataCube r = calibrate(f.ctx, f.cube(counts), s);
    for (double v : r.values()) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.5);
    }
    counts[0] = std::min(kD - 1.0, counts[0] + 50.0);
    const DataCube up = calibrate(f.ctx, f.cube(counts), s);
    EXPECT_GE(up.values()[0], r.values()[0]);
  }
}

TEST(Calibration, StrictRangeClipsToOne) {
  Fixture f;
  f.ctx.strict_unit_range();
  const Spectrum s = f.spec({110.0, 500.0, 130.0});
  const DataCube c = f.cube({900.0, 900.0, 900.0, 900.0});
  const DataCube r = calibrate(f.ctx, c, s);
  for (double v : r.values()) EXPECT_EQ(v, 1.0);
}

TEST(Calibration, RefusesSaturatedSpectrometer) {
  const Fixture f;
  const Spectrum s = f.spec({510.0, kD, 630.0});
  const DataCube c = f.cube({260.0, 340.0, 510.0, 640.0});
  try {
    calibrate(f.ctx, c, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::saturation);
  }
}

TEST(Calibration, ContextValidation) {
  const Fixture f;
  try {
    CalibrationContext::make(f.camera, f.spectrometer, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::configuration);
  }
  DeviceSpec no_dark = f.camera;
  no_dark.dark.reset();
  EXPECT_THROW(CalibrationContext::make(no_dark, f.spectrometer, identity_bank(1, 2, 2)), Error);
  EXPECT_THROW(CalibrationContext::make(f.camera, f.spectrometer, identity_bank(1, 2, 3)), Error);
  const DataCube wrong_shape(2, 1, f.camera.grid, Unit::digital_counts, 1.0, {1, 2, 3, 4});
  try {
    calibrate(f.ctx, wrong_shape, f.spec({510.0, 999.0, 630.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape_mismatch);
  }
}

TEST(CalibrateMinMax, MatchesFormulaAndEdges) {
  const WavelengthGrid g({500.0, 600.0});
  const DataCube white(1, 1, g, Unit::digital_counts, 1.0, {800.0, 900.0});
  const DataCube dark(1, 1, g, Unit::digital_counts, 1.0, {100.0, 100.0});
  const DataCube sig(1, 1, g, Unit::digital_counts, 1.0, {450.0, 100.0});
  const DataCube r = calibrate_min_max(sig, white, dark);
  EXPECT_DOUBLE_EQ(r.values()[0], 0.5);
  EXPECT_DOUBLE_EQ(r.values()[1], 0.0);
  EXPECT_EQ(calibrate_min_max(white, white, dark).values()[0], 1.0);
  const DataCube other(1, 1, WavelengthGrid({500.0, 610.0}), Unit::digital_counts, 1.0, {1.0, 1.0});
  EXPECT_THROW(calibrate_min_max(sig, other, dark), Error);
}

TEST(CalibrateMinMax, AgreesWithJointCalibrationForIdentityBank) {
  const Fixture f;
  const Spectrum s = f.spec({510.0, 999.0, 630.0});
  const DataCube c = f.cube({260.0, 340.0, 510.0, 640.0});
  const DataCube joint = calibrate(f.ctx, c, s);
  // Equivalent camera-side white: spectrometer excess over its dark, plus the camera dark.
  const DataCube white = f.cube({500.0 + 20.0, 600.0 + 40.0, 500.0 + 20.0, 600.0 + 40.0});
  const DataCube dark = f.cube({20.0, 40.0, 20.0, 40.0});
  const DataCube mm = calibrate_min_max(c, white, dark);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(joint.values()[i], mm.values()[i], 1e-14);
}

}  // namespace
}  // namespace hypercal
