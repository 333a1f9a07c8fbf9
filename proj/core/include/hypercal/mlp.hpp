#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hypercal {

inline constexpr std::size_t kMlpHiddenWidth = 10;

/// Parameter layout of the per-pixel network [bands, 10, 10, bands], ReLU
/// after every fully-connected layer. Weights are row-major (out x in) and
/// the flat parameter vector is W1 b1 W2 b2 W3 b3.
struct MlpLayout {
  std::size_t bands = 0;

  std::size_t w1() const noexcept { return 0; }
  std::size_t b1() const noexcept { return w1() + kMlpHiddenWidth * bands; }
  std::size_t w2() const noexcept { return b1() + kMlpHiddenWidth; }
  std::size_t b2() const noexcept { return w2() + kMlpHiddenWidth * kMlpHiddenWidth; }
  std::size_t w3() const noexcept { return b2() + kMlpHiddenWidth; }
  std::size_t b3() const noexcept { return w3() + bands * kMlpHiddenWidth; }
  std::size_t parameter_count() const noexcept { return b3() + bands; }
};

/// Row-major sample batch: `count` rows of `bands` inputs and targets.
struct SampleBatch {
  std::span<const double> inputs;
  std::span<const double> targets;
  std::size_t count = 0;
  std::size_t bands = 0;
};

class PixelMlp {
 public:
  PixelMlp() = default;
  explicit PixelMlp(std::size_t bands);
  PixelMlp(std::size_t bands, std::vector<double> parameters);

  /// He-uniform hidden weights from `seed`; output biases start at
  /// `output_bias` so the final ReLU begins in its active region.
  static PixelMlp initialized(std::size_t bands, std::uint64_t seed,
                              std::span<const double> output_bias);

  std::size_t bands() const noexcept { return layout_.bands; }
  const MlpLayout& layout() const noexcept { return layout_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }

  void forward(std::span<const double> input, std::span<double> output) const;

  /// Forward pass over a borrowed parameter vector laid out per MlpLayout.
  static void forward(std::span<const double> parameters, std::size_t bands,
                      std::span<const double> input, std::span<double> output);

 private:
  MlpLayout layout_;
  std::vector<double> params_;
};

/// Mean over the batch of loss_mse + alpha * loss_sam. When `gradient` is
/// non-empty it is overwritten with d(loss)/d(parameters).
double composite_loss(const PixelMlp& net, const SampleBatch& batch, double alpha,
                      std::span<double> gradient = {});

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t parameter_count, AdamConfig config);
  void step(std::span<double> parameters, std::span<const double> gradient);
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

/// Stops once `patience` consecutive epochs fail to beat the best loss by
/// more than `min_delta`.
class EarlyStopping {
 public:
  EarlyStopping(std::size_t patience, double min_delta)
      : patience_(patience), min_delta_(min_delta) {}

  /// Records one epoch; returns true when training should stop.
  bool update(double loss);

  double best() const noexcept { return best_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  std::size_t epochs() const noexcept { return epochs_; }

 private:
  std::size_t patience_;
  double min_delta_;
  double best_ = 0.0;
  bool has_best_ = false;
  std::size_t best_epoch_ = 0;
  std::size_t epochs_ = 0;
  std::size_t stale_ = 0;
};

}  // namespace hypercal
