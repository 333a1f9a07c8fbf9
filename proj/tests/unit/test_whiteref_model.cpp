#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <cstdlib>
#include <random>
#include <set>
#include <vector>

#include "hypercal/error.hpp"
#include "hypercal/log.hpp"
#include "hypercal/losses.hpp"
#include "hypercal/whiteref_model.hpp"
#include "test_support.hpp"

namespace hypercal {
namespace {

struct LinearTruth {
  std::size_t height, width, bands;
  std::vector<double> weights;  // per pixel: bands x bands, row = output
  std::vector<double> bias;     // per pixel: bands
};

LinearTruth random_truth(std::size_t h, std::size_t w, std::size_t bands, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LinearTruth t{h, w, bands, testing::uniform_vector(rng, h * w * bands * bands, 0.0, 0.1),
                testing::uniform_vector(rng, h * w * bands, 0.0, 0.2)};
  return t;
}

std::vector<CalibrationSample> samples_from(const LinearTruth& t, const std::vector<double>& inputs,
                                            std::size_t n) {
  const WavelengthGrid grid = WavelengthGrid::linspace(500.0, 900.0, t.bands);
  std::vector<CalibrationSample> out;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> x(inputs.begin() + static_cast<std::ptrdiff_t>(s * t.bands),
                          inputs.begin() + static_cast<std::ptrdiff_t>((s + 1) * t.bands));
    std::vector<double> cube(t.height * t.width * t.bands);
    for (std::size_t p = 0; p < t.height * t.width; ++p) {
      for (std::size_t o = 0; o < t.bands; ++o) {
        double y = t.bias[p * t.bands + o];
        for (std::size_t i = 0; i < t.bands; ++i) {
          y += t.weights[(p * t.bands + o) * t.bands + i] * x[i];
        }
        cube[p * t.bands + o] = y;
      }
    }
    out.push_back({Spectrum(grid, x, 1.0, Unit::normalized),
                   DataCube(t.height, t.width, grid, Unit::normalized, 1.0, std::move(cube)),
                   static_cast<double>(s)});
  }
  return out;
}

TEST(FitMlr, RecoversExactAffineMapPerPixel) {
  const LinearTruth truth = random_truth(2, 3, 5, 1);
  std::mt19937_64 rng(2);
  const auto inputs = testing::uniform_vector(rng, 50 * 5, 0.0, 1.0);
  const PixelModelBank bank = fit_mlr(samples_from(truth, inputs, 50));
  EXPECT_EQ(bank.meta().ridge_lambda, 0.0);
  for (std::size_t p = 0; p < 6; ++p) {
    const auto block = bank.block(p / 3, p % 3);
    for (std::size_t k = 0; k < 25; ++k) EXPECT_NEAR(block[k], truth.weights[p * 25 + k], 1e-10);
    for (std::size_t o = 0; o < 5; ++o) EXPECT_NEAR(block[25 + o], truth.bias[p * 5 + o], 1e-10);
  }
}

TEST(FitMlr, RankDeficientDesignFallsBackToRidgeWithWarning) {
  const LinearTruth truth = random_truth(1, 2, 4, 3);
  std::mt19937_64 rng(4);
  auto inputs = testing::uniform_vector(rng, 30 * 4, 0.0, 1.0);
  for (std::size_t s = 0; s < 30; ++s) inputs[s * 4 + 3] = inputs[s * 4 + 0];  // duplicate column
  std::vector<std::string> warnings;
  log::set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
  const auto samples = samples_from(truth, inputs, 30);
  const PixelModelBank bank = fit_mlr(samples);
  log::set_warning_sink({});
  EXPECT_EQ(bank.meta().ridge_lambda, kRidgeLambda);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("rank deficient"), std::string::npos);
  // Predictions stay accurate even though the coefficients are not unique.
  for (const auto& s : samples) {
    const DataCube pred = predict(bank, s.spectrometer);
    for (std::size_t i = 0; i < pred.values().size(); ++i) {
      EXPECT_NEAR(pred.values()[i], s.cube.values()[i], 1e-6);
    }
  }
}

TEST(FitMlr, FewerSamplesThanBandsUsesRidge) {
  const LinearTruth truth = random_truth(1, 1, 6, 5);
  std::mt19937_64 rng(6);
  const auto inputs = testing::uniform_vector(rng, 4 * 6, 0.0, 1.0);
  log::set_warning_sink([](const std::string&) {});
  const PixelModelBank bank = fit_mlr(samples_from(truth, inputs, 4));
  log::set_warning_sink({});
  EXPECT_EQ(bank.meta().ridge_lambda, kRidgeLambda);
}

TEST(FitMlr, RejectsOutOfRangeOrInconsistentSamples) {
  const LinearTruth truth = random_truth(1, 1, 3, 7);
  std::mt19937_64 rng(8);
  auto samples = samples_from(truth, testing::uniform_vector(rng, 20 * 3, 0.0, 1.0), 20);
  samples[3].cube.values()[0] = 1.5;
  EXPECT_THROW(fit_mlr(samples), Error);
  EXPECT_THROW(fit_mlr(std::vector<CalibrationSample>{}), Error);
}

TEST(Split, SizesDisjointAndDeterministic) {
  const SplitIndices a = split_indices(200, 9);
  EXPECT_EQ(a.train.size(), 160u);
  EXPECT_EQ(a.validation.size(), 20u);
  EXPECT_EQ(a.test.size(), 20u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 200u);
  const SplitIndices b = split_indices(200, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(split_indices(200, 10).train, a.train);

  const SplitIndices odd = split_indices(15, 1);
  EXPECT_EQ(odd.train.size(), 12u);
  EXPECT_EQ(odd.validation.size(), 1u);
  EXPECT_EQ(odd.test.size(), 2u);
  EXPECT_THROW(split_indices(9, 1), Error);
}

TEST(Augment, ReplicatesScalesAndZeroesMatchedChannels) {
  const LinearTruth truth = random_truth(2, 2, 8, 11);
  std::mt19937_64 rng(12);
  const auto samples = samples_from(truth, testing::uniform_vector(rng, 10 * 8, 0.1, 0.9), 10);
  const auto aug = augment(samples, 13);
  ASSERT_EQ(aug.size(), 30u);
  EXPECT_EQ(aug.size(), augment(samples, 13).size());
  std::size_t zeroed = 0;
  for (std::size_t i = 0; i < aug.size(); ++i) {
    const auto& src = samples[i / 3];
    const auto& a = aug[i];
    double scale = -1.0;
    for (std::size_t b = 0; b < 8; ++b) {
      if (a.spectrometer[b] == 0.0) {
        ++zeroed;
        for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(a.cube.pixel(p)[b], 0.0);
        continue;
      }
      const double s = a.spectrometer[b] / src.spectrometer[b];
      EXPECT_GE(s, 0.9 - 1e-12);
      EXPECT_LE(s, 1.1 + 1e-12);
      if (scale < 0) scale = s;
      EXPECT_NEAR(s, scale, 1e-12);  // one scale per replica
      for (std::size_t p = 0; p < 4; ++p) {
        EXPECT_NEAR(a.cube.pixel(p)[b], std::min(1.0, src.cube.pixel(p)[b] * scale), 1e-12);
      }
    }
  }
  EXPECT_GT(zeroed, 0u);
  EXPECT_LT(zeroed, 30u * 8u / 4u);
  const auto other = augment(samples, 14);
  EXPECT_NE(other[0].spectrometer, aug[0].spectrometer);
}

TEST(Bank, EncodeDecodeRoundTripsBitExactly) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd;
  std::vector<double> params(2 * 3 * PixelModelBank::block_size(ModelKind::mlp, 4));
  for (double& v : params) v = nd(rng);
  params[5] = -0.0;
  params[6] = std::numeric_limits<double>::denorm_min();
  const PixelModelBank bank(ModelKind::mlp, 2, 3, 4, params);
  const auto bytes = encode_bank(bank);
  EXPECT_EQ(bytes.size(), kBankHeaderBytes + params.size() * 8);
  const PixelModelBank back = decode_bank(bytes);
  EXPECT_EQ(back.kind(), ModelKind::mlp);
  EXPECT_EQ(back.height(), 2u);
  EXPECT_EQ(back.width(), 3u);
  EXPECT_EQ(back.bands(), 4u);
  ASSERT_EQ(back.parameters().size(), params.size());
  EXPECT_EQ(std::memcmp(back.parameters().data(), params.data(), params.size() * 8), 0);
  EXPECT_EQ(encode_bank(back), bytes);
}

TEST(Bank, DecodeRejectsCorruptContainers) {
  const PixelModelBank bank(ModelKind::mlr, 1, 1, 2, std::vector<double>(6, 0.5));
  auto bytes = encode_bank(bank);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  auto bad_version = bytes;
  bad_version[4] = 9;
  auto truncated = bytes;
  truncated.pop_back();
  auto bad_kind = bytes;
  bad_kind[6] = 7;
  for (const auto* b : {&bad_magic, &bad_version, &truncated, &bad_kind}) {
    try {
      decode_bank(*b);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::format);
    }
  }
}

TEST(Bank, SaveLoadKeepsMetadataSidecar) {
  testing::TempDir dir("bank");
  TrainingMeta meta;
  meta.alpha = 0.1;
  meta.seed = 42;
  meta.split_seed = 7;
  meta.loss_history = {0.5, 0.25};
  meta.warnings = {"note"};
  const PixelModelBank bank(ModelKind::mlr, 1, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}, meta);
  save_bank(bank, dir / "b.hcal");
  ASSERT_TRUE(std::filesystem::exists(dir / "b.hcal.json"));
  const PixelModelBank back = load_bank(dir / "b.hcal");
  EXPECT_EQ(back.meta().seed, 42u);
  EXPECT_EQ(back.meta().split_seed, 7u);
  EXPECT_EQ(back.meta().loss_history, meta.loss_history);
  EXPECT_EQ(back.meta().warnings, meta.warnings);
  EXPECT_EQ(training_meta_to_json(back.meta(), back), training_meta_to_json(meta, bank));
  EXPECT_THROW(load_bank(dir / "missing.hcal"), Error);
}

TEST(Predict, MlpOutputsAreFloored) {
  const PixelModelBank bank(ModelKind::mlp, 1, 1, 3,
                            std::vector<double>(PixelModelBank::block_size(ModelKind::mlp, 3), 0.0));
  const DataCube out = predict(bank, Spectrum(WavelengthGrid({1, 2, 3}), {0.5, 0.5, 0.5}, 1.0,
                                              Unit::normalized));
  for (double v : out.values()) EXPECT_EQ(v, kMlpOutputFloor);
}

TEST(Evaluate, MatchesHandComputedMetrics) {
  // Identity MLR bank on 1x2 pixels, 2 bands.
  const PixelModelBank bank(ModelKind::mlr, 1, 2, 2, {1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0});
  const WavelengthGrid g({600.0, 700.0});
  CalibrationSample s{Spectrum(g, {0.2, 0.4}, 1.0, Unit::normalized),
                      DataCube(1, 2, g, Unit::normalized, 1.0, {0.2, 0.4, 0.3, 0.1}), 0.0};
  const ReconstructionReport r = evaluate(bank, std::vector<CalibrationSample>{s});
  EXPECT_DOUBLE_EQ(r.pixel_mse[0], 0.0);
  EXPECT_NEAR(r.pixel_mse[1], (0.01 + 0.09) / 2, 1e-15);
  EXPECT_NEAR(r.pixel_mae[1], (0.1 + 0.3) / 2, 1e-15);
  const double angle = std::acos((0.2 * 0.3 + 0.4 * 0.1) / (std::hypot(0.2, 0.4) * std::hypot(0.3, 0.1)));
  EXPECT_NEAR(r.pixel_sam[1], angle, 1e-12);
  EXPECT_NEAR(r.mse.mean, 0.025, 1e-15);
  EXPECT_NEAR(r.mse.stddev, 0.025, 1e-15);
  EXPECT_EQ(r.model_size_bytes_per_pixel, 6u * 8u);
}

std::vector<CalibrationSample> small_mlp_data(std::size_t n, std::uint64_t seed) {
  const LinearTruth truth = random_truth(2, 2, 4, seed);
  std::mt19937_64 rng(seed + 1);
  return samples_from(truth, testing::uniform_vector(rng, n * 4, 0.1, 1.0), n);
}

TEST(FitMlp, DeterministicAcrossThreadCounts) {
  const auto data = small_mlp_data(30, 21);
  const DataSplit parts = split(data, 1);
  MlpHyperparameters hyper;
  hyper.max_epochs = 40;
  hyper.seed = 5;
  ::setenv("HYPERCAL_THREADS", "1", 1);
  const PixelModelBank one = fit_mlp(parts.train, parts.validation, hyper);
  ::setenv("HYPERCAL_THREADS", "4", 1);
  const PixelModelBank four = fit_mlp(parts.train, parts.validation, hyper);
  ::unsetenv("HYPERCAL_THREADS");
  EXPECT_EQ(encode_bank(one), encode_bank(four));
  EXPECT_EQ(one.meta().loss_history, four.meta().loss_history);
  EXPECT_LE(one.meta().max_epochs_run, 40u);
}

TEST(FitMlp, ValidationLossDecreasesFromStart) {
  const auto data = small_mlp_data(40, 31);
  const DataSplit parts = split(data, 2);
  MlpHyperparameters hyper;
  hyper.max_epochs = 300;
  hyper.adam.learning_rate = 1e-2;
  const PixelModelBank bank = fit_mlp(parts.train, parts.validation, hyper);
  const auto& h = bank.meta().loss_history;
  ASSERT_GE(h.size(), 2u);
  EXPECT_LT(*std::min_element(h.begin(), h.end()), h.front());
}

TEST(TrainPixelMlp, PersistentDivergenceThrowsAfterRestarts) {
  const std::vector<double> in = {0.2, 0.4, 0.6, 0.8, 0.3, 0.5};
  const std::vector<double> out = {0.1, 0.2, 0.3, 0.4, 0.2, 0.3};
  // A non-finite target makes every attempt's loss non-finite.
  std::vector<double> bad = out;
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  const SampleBatch batch{in, out, 3, 2};
  const SampleBatch poisoned{in, bad, 3, 2};
  MlpHyperparameters hyper;
  hyper.max_epochs = 50;
  try {
    train_pixel_mlp(poisoned, batch, hyper, 1);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::training_diverged);
  }
  const PixelTrainingResult ok = train_pixel_mlp(batch, batch, hyper, 1);
  EXPECT_EQ(ok.restarts, 0u);
  EXPECT_GT(ok.epochs, 0u);
  EXPECT_DOUBLE_EQ(ok.learning_rate, hyper.adam.learning_rate);
}

}  // namespace
}  // namespace hypercal
