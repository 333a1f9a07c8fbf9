#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypercal/mlp.hpp"
#include "hypercal/spectral_types.hpp"

namespace hypercal {

/// One synchronized training record: a downsampled, normalized,
/// dark-subtracted spectrometer reading and the matching white-reference
/// cube from the camera (normalized, dark-subtracted).
struct CalibrationSample {
  Spectrum spectrometer;
  DataCube cube;
  double timestamp = 0.0;  ///< seconds since epoch
};

/// Throws unless every sample has consistent band counts and values in [0, 1].
void validate_samples(std::span<const CalibrationSample> samples);

enum class ModelKind : std::uint8_t { mlr = 0, mlp = 1 };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(std::string_view text);

struct TrainingMeta {
  double alpha = 0.0;
  std::size_t max_epochs = 0;
  std::size_t patience = 0;
  double min_delta = 0.0;
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;  ///< recorded by the caller that drew the split
  std::size_t augment_replicas = 0;  ///< 0 when training data was not augmented
  double ridge_lambda = 0.0;  ///< 0 unless the MLR design was rank deficient
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  std::size_t mean_epochs = 0;   ///< MLP: mean epochs run per pixel
  std::size_t max_epochs_run = 0;
  std::size_t restarts = 0;      ///< MLP: total divergence restarts
  std::vector<double> loss_history;  ///< MLP: mean validation loss per epoch
  std::vector<std::string> warnings;
};

/// One independent parameter block per pixel, stored row-major over (r, c).
///
/// MLR block: bands x bands weights (row = output band) followed by bands
/// intercepts. MLP block: the PixelMlp parameter vector.
class PixelModelBank {
 public:
  PixelModelBank() = default;
  PixelModelBank(ModelKind kind, std::size_t height, std::size_t width, std::size_t bands,
                 std::vector<double> parameters, TrainingMeta meta = {});

  static std::size_t block_size(ModelKind kind, std::size_t bands) noexcept;

  ModelKind kind() const noexcept { return kind_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bands() const noexcept { return bands_; }
  std::size_t block_size() const noexcept { return block_size(kind_, bands_); }
  std::size_t bytes_per_pixel() const noexcept { return block_size() * sizeof(double); }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<const double> block(std::size_t row, std::size_t col) const {
    return {params_.data() + (row * width_ + col) * block_size(), block_size()};
  }
  const TrainingMeta& meta() const noexcept { return meta_; }
  void set_meta(TrainingMeta meta) { meta_ = std::move(meta); }

  /// Evaluates pixel (r, c) on a spectrometer vector. MLP outputs are
  /// floored at kMlpOutputFloor.
  void predict_pixel(std::size_t row, std::size_t col, std::span<const double> spectrum,
                     std::span<double> out) const;

 private:
  ModelKind kind_ = ModelKind::mlr;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t bands_ = 0;
  std::vector<double> params_;
  TrainingMeta meta_;
};

inline constexpr double kMlpOutputFloor = 1e-6;
inline constexpr double kRidgeLambda = 1e-8;

struct AugmentOptions {
  std::size_t replicas = 3;
  double max_scale = 0.10;         ///< replica scale drawn from U(-max_scale, +max_scale)
  double zero_probability = 0.10;  ///< per-channel chance of zeroing input and output
};

/// Replicates every sample `replicas` times; each replica gets one random
/// scale applied to both spectrometer and cube, then matched channel
/// indices are zeroed with `zero_probability`. Deterministic in `seed`.
std::vector<CalibrationSample> augment(std::span<const CalibrationSample> samples,
                                       std::uint64_t seed, const AugmentOptions& options = {});

struct DataSplit {
  std::vector<CalibrationSample> train;
  std::vector<CalibrationSample> validation;
  std::vector<CalibrationSample> test;
};

/// Shuffled 80/10/10 partition: floor(0.8n), floor(0.1n), remainder.
DataSplit split(std::span<const CalibrationSample> samples, std::uint64_t seed);

/// Index form of split(); returns the shuffled order cut into three ranges.
struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};
SplitIndices split_indices(std::size_t count, std::uint64_t seed);

/// Per-pixel affine least squares from spectrometer vector to pixel
/// spectrum, with ridge fallback (kRidgeLambda, intercept unpenalized)
/// when the design is rank deficient.
PixelModelBank fit_mlr(std::span<const CalibrationSample> train);

struct MlpHyperparameters {
  double alpha = 0.1;
  std::size_t max_epochs = 1000;
  std::size_t patience = 10;
  double min_delta = 1e-4;
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::size_t max_restarts = 3;
};

/// Per-pixel [bands, 10, 10, bands] networks trained full-batch with Adam
/// on loss_mse + alpha * loss_sam, early-stopped on the validation loss.
/// Pixels train independently with seeds derived from (seed, r, c).
PixelModelBank fit_mlp(std::span<const CalibrationSample> train,
                       std::span<const CalibrationSample> validation,
                       const MlpHyperparameters& hyper = {});

struct PixelTrainingResult {
  PixelMlp network;                  ///< parameters at the best validation epoch
  std::vector<double> val_history;   ///< validation loss after each epoch
  std::size_t epochs = 0;
  std::size_t restarts = 0;
  double learning_rate = 0.0;        ///< rate of the successful attempt
};

/// Trains one pixel network. Inputs and targets are row-major sample x band.
/// A non-finite loss restarts training with a tenfold smaller learning rate;
/// after `max_restarts` restarts an Error(training_diverged) is thrown.
PixelTrainingResult train_pixel_mlp(const SampleBatch& train, const SampleBatch& validation,
                                    const MlpHyperparameters& hyper, std::uint64_t seed);

/// White-reference cube predicted from one spectrometer vector. The cube is
/// labelled with `output_grid`, or with the spectrometer grid when empty.
DataCube predict(const PixelModelBank& bank, const Spectrum& spectrometer,
                 const WavelengthGrid& output_grid = {});

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ReconstructionReport {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t samples = 0;
  std::vector<double> pixel_mse;  ///< per-pixel mean over samples, row-major
  std::vector<double> pixel_mae;
  std::vector<double> pixel_sam;
  MetricSummary mse;  ///< over pixels
  MetricSummary mae;
  MetricSummary sam;
  std::size_t zero_norm_count = 0;
  std::size_t model_size_bytes_per_pixel = 0;
  double inference_seconds = 0.0;  ///< total time spent in predict()
};

ReconstructionReport evaluate(const PixelModelBank& bank,
                              std::span<const CalibrationSample> test);

// Model bank container. Header: "HCAL", u16 version, u8 kind, u32 H,
// u32 W, u16 bands; then row-major per-pixel blocks of little-endian f64.
// training_meta lives in a JSON sidecar at `<path>.json`.
inline constexpr std::uint16_t kBankFormatVersion = 1;
inline constexpr std::size_t kBankHeaderBytes = 17;

std::vector<std::uint8_t> encode_bank(const PixelModelBank& bank);
PixelModelBank decode_bank(std::span<const std::uint8_t> bytes, TrainingMeta meta = {});

std::string training_meta_to_json(const TrainingMeta& meta, const PixelModelBank& bank);
TrainingMeta training_meta_from_json(const std::string& text);

void save_bank(const PixelModelBank& bank, const std::filesystem::path& path);
PixelModelBank load_bank(const std::filesystem::path& path);

}  // namespace hypercal
