#include "hypercal/whiteref_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "hypercal/error.hpp"
#include "hypercal/log.hpp"
#include "hypercal/losses.hpp"
#include "hypercal/parallel.hpp"

namespace hypercal {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pixels solved per least-squares call. Fixed so results never depend on
// scheduling.
constexpr std::size_t kMlrPixelChunk = 32;

void require_nonempty(std::span<const CalibrationSample> samples, const char* what) {
  if (samples.empty()) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + ": no samples");
  }
}

/// Row-major n x bands matrix of spectrometer vectors.
std::vector<double> stack_inputs(std::span<const CalibrationSample> samples) {
  const std::size_t bands = samples.front().spectrometer.size();
  std::vector<double> out(samples.size() * bands);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto v = samples[n].spectrometer.values();
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(n * bands));
  }
  return out;
}

/// Row-major n x bands matrix of one pixel's spectra.
void gather_targets(std::span<const CalibrationSample> samples, std::size_t pixel,
                    std::vector<double>& out) {
  const std::size_t bands = samples.front().cube.bands();
  out.resize(samples.size() * bands);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto v = samples[n].cube.pixel(pixel);
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(n * bands));
  }
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double acc = 0.0;
  for (double v : values) acc += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(acc / n);
  return s;
}

}  // namespace

void validate_samples(std::span<const CalibrationSample> samples) {
  require_nonempty(samples, "validate_samples");
  const auto& first = samples.front();
  const std::size_t bands = first.cube.bands();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.spectrometer.size() != bands || s.cube.bands() != bands) {
      throw Error(ErrorCode::shape_mismatch,
                  "sample " + std::to_string(i) + ": spectrometer has " +
                      std::to_string(s.spectrometer.size()) + " values, cube has " +
                      std::to_string(s.cube.bands()) + " bands, expected " +
                      std::to_string(bands));
    }
    if (s.cube.height() != first.cube.height() || s.cube.width() != first.cube.width()) {
      throw Error(ErrorCode::shape_mismatch,
                  "sample " + std::to_string(i) + ": cube geometry differs from sample 0");
    }
    auto in_unit_range = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!std::all_of(s.spectrometer.values().begin(), s.spectrometer.values().end(),
                     in_unit_range) ||
        !std::all_of(s.cube.values().begin(), s.cube.values().end(), in_unit_range)) {
      throw Error(ErrorCode::domain,
                  "sample " + std::to_string(i) + ": values must lie in [0, 1]");
    }
  }
}

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::mlr ? "mlr" : "mlp";
}

ModelKind model_kind_from_string(std::string_view text) {
  if (text == "mlr") return ModelKind::mlr;
  if (text == "mlp") return ModelKind::mlp;
  throw Error(ErrorCode::configuration, "unknown model kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// PixelModelBank

PixelModelBank::PixelModelBank(ModelKind kind, std::size_t height, std::size_t width,
                               std::size_t bands, std::vector<double> parameters,
                               TrainingMeta meta)
    : kind_(kind),
      height_(height),
      width_(width),
      bands_(bands),
      params_(std::move(parameters)),
      meta_(std::move(meta)) {
  if (height_ == 0 || width_ == 0 || bands_ == 0) {
    throw Error(ErrorCode::shape_mismatch, "model bank dimensions must be positive");
  }
  if (params_.size() != height_ * width_ * block_size()) {
    throw Error(ErrorCode::shape_mismatch, "model bank parameter count does not match H*W*block");
  }
}

std::size_t PixelModelBank::block_size(ModelKind kind, std::size_t bands) noexcept {
  return kind == ModelKind::mlr ? bands * bands + bands : MlpLayout{bands}.parameter_count();
}

void PixelModelBank::predict_pixel(std::size_t row, std::size_t col,
                                   std::span<const double> spectrum,
                                   std::span<double> out) const {
  const auto p = block(row, col);
  if (kind_ == ModelKind::mlr) {
    const double* w = p.data();
    const double* b = p.data() + bands_ * bands_;
    for (std::size_t o = 0; o < bands_; ++o) {
      double acc = b[o];
      const double* wr = w + o * bands_;
      for (std::size_t i = 0; i < bands_; ++i) acc += wr[i] * spectrum[i];
      out[o] = acc;
    }
    return;
  }
  PixelMlp::forward(p, bands_, spectrum, out);
  for (double& v : out) v = std::max(v, kMlpOutputFloor);
}

// ---------------------------------------------------------------------------
// Augmentation and splitting

std::vector<CalibrationSample> augment(std::span<const CalibrationSample> samples,
                                       std::uint64_t seed, const AugmentOptions& options) {
  require_nonempty(samples, "augment");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> scale_dist(-options.max_scale, options.max_scale);
  std::bernoulli_distribution zero_dist(options.zero_probability);

  std::vector<CalibrationSample> out;
  out.reserve(samples.size() * options.replicas);
  for (const auto& sample : samples) {
    const std::size_t bands = sample.spectrometer.size();
    for (std::size_t k = 0; k < options.replicas; ++k) {
      const double scale = 1.0 + scale_dist(rng);
      std::vector<bool> zeroed(bands);
      for (std::size_t b = 0; b < bands; ++b) zeroed[b] = zero_dist(rng);

      auto transform = [&](double v, std::size_t band) {
        return zeroed[band] ? 0.0 : std::clamp(v * scale, 0.0, 1.0);
      };
      std::vector<double> spec(bands);
      for (std::size_t b = 0; b < bands; ++b) spec[b] = transform(sample.spectrometer[b], b);
      std::vector<double> cube(sample.cube.values().size());
      const auto src = sample.cube.values();
      for (std::size_t i = 0; i < cube.size(); ++i) cube[i] = transform(src[i], i % bands);

      out.push_back({sample.spectrometer.with_values(std::move(spec), sample.spectrometer.unit()),
                     sample.cube.with_values(std::move(cube), sample.cube.unit()),
                     sample.timestamp});
    }
  }
  return out;
}

SplitIndices split_indices(std::size_t count, std::uint64_t seed) {
  if (count < 10) {
    throw Error(ErrorCode::invalid_argument,
                "split needs at least 10 samples, got " + std::to_string(count));
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_train = count * 8 / 10;
  const std::size_t n_val = count / 10;
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

DataSplit split(std::span<const CalibrationSample> samples, std::uint64_t seed) {
  const SplitIndices idx = split_indices(samples.size(), seed);
  DataSplit out;
  for (std::size_t i : idx.train) out.train.push_back(samples[i]);
  for (std::size_t i : idx.validation) out.validation.push_back(samples[i]);
  for (std::size_t i : idx.test) out.test.push_back(samples[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Multi-output linear regression

PixelModelBank fit_mlr(std::span<const CalibrationSample> train) {
  validate_samples(train);
  const std::size_t n = train.size();
  const std::size_t bands = train.front().cube.bands();
  const std::size_t height = train.front().cube.height();
  const std::size_t width = train.front().cube.width();
  const std::size_t pixels = height * width;
  const auto nb = static_cast<Eigen::Index>(bands);
  const auto nn = static_cast<Eigen::Index>(n);

  const std::vector<double> inputs = stack_inputs(train);
  const Eigen::Map<const RowMatrix> x(inputs.data(), nn, nb);
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_qr(xc);
  rank_qr.setThreshold(1e-10);
  const bool deficient = n < bands + 1 || rank_qr.rank() < nb;

  TrainingMeta meta;
  meta.train_samples = n;
  Eigen::HouseholderQR<Eigen::MatrixXd> solver;
  if (deficient) {
    meta.ridge_lambda = kRidgeLambda;
    const std::string msg = "MLR design is rank deficient (rank " +
                            std::to_string(rank_qr.rank()) + " of " + std::to_string(bands) +
                            ", " + std::to_string(n) + " samples); using ridge lambda=1e-8";
    meta.warnings.push_back(msg);
    log::warn(msg);
    Eigen::MatrixXd augmented(nn + nb, nb);
    augmented.topRows(nn) = xc;
    augmented.bottomRows(nb) = Eigen::MatrixXd::Identity(nb, nb) * std::sqrt(kRidgeLambda);
    solver.compute(augmented);
  } else {
    solver.compute(xc);
  }

  const std::size_t block = PixelModelBank::block_size(ModelKind::mlr, bands);
  std::vector<double> params(pixels * block);
  const std::size_t chunks = (pixels + kMlrPixelChunk - 1) / kMlrPixelChunk;

  parallel_for(chunks, [&](std::size_t chunk) {
    const std::size_t first = chunk * kMlrPixelChunk;
    const std::size_t last = std::min(pixels, first + kMlrPixelChunk);
    const auto cols = static_cast<Eigen::Index>((last - first) * bands);
    const Eigen::Index rows = deficient ? nn + nb : nn;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rows, cols);
    for (std::size_t p = first; p < last; ++p) {
      const auto col0 = static_cast<Eigen::Index>((p - first) * bands);
      for (std::size_t s = 0; s < n; ++s) {
        const auto v = train[s].cube.pixel(p);
        for (std::size_t b = 0; b < bands; ++b) {
          rhs(static_cast<Eigen::Index>(s), col0 + static_cast<Eigen::Index>(b)) = v[b];
        }
      }
    }
    const Eigen::RowVectorXd y_mean = rhs.topRows(nn).colwise().mean();
    rhs.topRows(nn).rowwise() -= y_mean;
    const Eigen::MatrixXd coef = solver.solve(rhs);  // bands_in x cols

    for (std::size_t p = first; p < last; ++p) {
      const auto col0 = static_cast<Eigen::Index>((p - first) * bands);
      double* out = params.data() + p * block;
      for (std::size_t o = 0; o < bands; ++o) {
        const Eigen::Index c = col0 + static_cast<Eigen::Index>(o);
        double intercept = y_mean(c);
        for (std::size_t i = 0; i < bands; ++i) {
          const double w = coef(static_cast<Eigen::Index>(i), c);
          out[o * bands + i] = w;
          intercept -= w * x_mean(static_cast<Eigen::Index>(i));
        }
        out[bands * bands + o] = intercept;
      }
    }
  });

  return PixelModelBank(ModelKind::mlr, height, width, bands, std::move(params), std::move(meta));
}

// ---------------------------------------------------------------------------
// Multi-layer perceptron

PixelTrainingResult train_pixel_mlp(const SampleBatch& train, const SampleBatch& validation,
                                    const MlpHyperparameters& hyper, std::uint64_t seed) {
  const std::size_t bands = train.bands;
  if (train.count == 0 || validation.count == 0) {
    throw Error(ErrorCode::invalid_argument, "MLP training needs train and validation samples");
  }

  std::vector<double> bias(bands, 0.0);
  for (std::size_t n = 0; n < train.count; ++n) {
    for (std::size_t b = 0; b < bands; ++b) bias[b] += train.targets[n * bands + b];
  }
  for (double& v : bias) v /= static_cast<double>(train.count);

  AdamConfig adam = hyper.adam;
  for (std::size_t attempt = 0; attempt <= hyper.max_restarts; ++attempt) {
    PixelMlp net = PixelMlp::initialized(bands, mix64(seed + attempt), bias);
    AdamOptimizer optimizer(net.layout().parameter_count(), adam);
    EarlyStopping stopper(hyper.patience, hyper.min_delta);
    std::vector<double> grad(net.layout().parameter_count());
    std::vector<double> best(net.parameters().begin(), net.parameters().end());
    PixelTrainingResult result;
    bool diverged = false;

    for (std::size_t epoch = 0; epoch < hyper.max_epochs; ++epoch) {
      const double train_loss = composite_loss(net, train, hyper.alpha, grad);
      if (!std::isfinite(train_loss)) {
        diverged = true;
        break;
      }
      optimizer.step(net.parameters(), grad);
      const double val_loss = composite_loss(net, validation, hyper.alpha);
      if (!std::isfinite(val_loss)) {
        diverged = true;
        break;
      }
      result.val_history.push_back(val_loss);
      const std::size_t previous_best = stopper.best_epoch();
      const bool stop = stopper.update(val_loss);
      if (stopper.best_epoch() != previous_best) {
        std::copy(net.parameters().begin(), net.parameters().end(), best.begin());
      }
      if (stop) break;
    }
    if (diverged) {
      adam.learning_rate /= 10.0;
      continue;
    }
    result.network = PixelMlp(bands, std::move(best));
    result.epochs = result.val_history.size();
    result.restarts = attempt;
    result.learning_rate = adam.learning_rate;
    return result;
  }
  throw Error(ErrorCode::training_diverged,
              "MLP loss stayed non-finite after " + std::to_string(hyper.max_restarts) +
                  " restarts");
}

PixelModelBank fit_mlp(std::span<const CalibrationSample> train,
                       std::span<const CalibrationSample> validation,
                       const MlpHyperparameters& hyper) {
  validate_samples(train);
  validate_samples(validation);
  const std::size_t bands = train.front().cube.bands();
  const std::size_t height = train.front().cube.height();
  const std::size_t width = train.front().cube.width();
  if (validation.front().cube.bands() != bands || validation.front().cube.height() != height ||
      validation.front().cube.width() != width) {
    throw Error(ErrorCode::shape_mismatch, "validation samples differ in shape from training");
  }
  const std::size_t pixels = height * width;
  const std::size_t block = PixelModelBank::block_size(ModelKind::mlp, bands);

  const std::vector<double> train_in = stack_inputs(train);
  const std::vector<double> val_in = stack_inputs(validation);
  std::vector<double> params(pixels * block);
  std::vector<std::vector<double>> histories(pixels);
  std::vector<std::size_t> restarts(pixels, 0);

  parallel_for(pixels, [&](std::size_t p) {
    std::vector<double> train_out;
    std::vector<double> val_out;
    gather_targets(train, p, train_out);
    gather_targets(validation, p, val_out);
    const SampleBatch tb{train_in, train_out, train.size(), bands};
    const SampleBatch vb{val_in, val_out, validation.size(), bands};
    PixelTrainingResult r = train_pixel_mlp(tb, vb, hyper, pixel_seed(hyper.seed, p / width, p % width));
    const auto w = r.network.parameters();
    std::copy(w.begin(), w.end(), params.begin() + static_cast<std::ptrdiff_t>(p * block));
    histories[p] = std::move(r.val_history);
    restarts[p] = r.restarts;
  });

  TrainingMeta meta;
  meta.alpha = hyper.alpha;
  meta.max_epochs = hyper.max_epochs;
  meta.patience = hyper.patience;
  meta.min_delta = hyper.min_delta;
  meta.adam = hyper.adam;
  meta.seed = hyper.seed;
  meta.train_samples = train.size();
  meta.val_samples = validation.size();
  std::size_t total_epochs = 0;
  for (const auto& h : histories) {
    total_epochs += h.size();
    meta.max_epochs_run = std::max(meta.max_epochs_run, h.size());
  }
  meta.mean_epochs = total_epochs / pixels;
  meta.restarts = std::accumulate(restarts.begin(), restarts.end(), std::size_t{0});
  meta.loss_history.assign(meta.max_epochs_run, 0.0);
  for (std::size_t e = 0; e < meta.max_epochs_run; ++e) {
    double sum = 0.0;
    for (const auto& h : histories) sum += h.empty() ? 0.0 : h[std::min(e, h.size() - 1)];
    meta.loss_history[e] = sum / static_cast<double>(pixels);
  }
  if (meta.restarts > 0) {
    const std::string msg = std::to_string(meta.restarts) + " pixel restart(s) after divergence";
    meta.warnings.push_back(msg);
    log::warn(msg);
  }
  return PixelModelBank(ModelKind::mlp, height, width, bands, std::move(params), std::move(meta));
}

// ---------------------------------------------------------------------------
// Inference and evaluation

DataCube predict(const PixelModelBank& bank, const Spectrum& spectrometer,
                 const WavelengthGrid& output_grid) {
  if (spectrometer.size() != bank.bands()) {
    throw Error(ErrorCode::shape_mismatch,
                "spectrometer has " + std::to_string(spectrometer.size()) +
                    " values but the model bank expects " + std::to_string(bank.bands()));
  }
  for (double v : spectrometer.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::domain, "non-finite spectrometer value");
  }
  const WavelengthGrid& grid = output_grid.empty() ? spectrometer.grid() : output_grid;
  if (grid.size() != bank.bands()) {
    throw Error(ErrorCode::shape_mismatch, "output grid does not match the bank band count");
  }
  DataCube cube(bank.height(), bank.width(), grid, Unit::normalized,
                spectrometer.integration_time_ms());
  for (std::size_t r = 0; r < bank.height(); ++r) {
    for (std::size_t c = 0; c < bank.width(); ++c) {
      bank.predict_pixel(r, c, spectrometer.values(), cube.pixel(r, c));
    }
  }
  return cube;
}

ReconstructionReport evaluate(const PixelModelBank& bank,
                              std::span<const CalibrationSample> test) {
  require_nonempty(test, "evaluate");
  for (const auto& s : test) {
    if (s.cube.height() != bank.height() || s.cube.width() != bank.width() ||
        s.cube.bands() != bank.bands()) {
      throw Error(ErrorCode::shape_mismatch, "test cube does not match the model bank shape");
    }
  }
  const std::size_t pixels = bank.height() * bank.width();
  ReconstructionReport report;
  report.height = bank.height();
  report.width = bank.width();
  report.samples = test.size();
  report.model_size_bytes_per_pixel = bank.bytes_per_pixel();
  report.pixel_mse.assign(pixels, 0.0);
  report.pixel_mae.assign(pixels, 0.0);
  report.pixel_sam.assign(pixels, 0.0);

  for (const auto& sample : test) {
    const auto start = std::chrono::steady_clock::now();
    const DataCube pred = predict(bank, sample.spectrometer);
    report.inference_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (std::size_t p = 0; p < pixels; ++p) {
      const auto a = pred.pixel(p);
      const auto b = sample.cube.pixel(p);
      report.pixel_mse[p] += loss_mse(a, b);
      report.pixel_mae[p] += loss_mae(a, b);
      const SpectralAngle angle = spectral_angle(a, b);
      report.pixel_sam[p] += angle.radians;
      if (angle.zero_norm) ++report.zero_norm_count;
    }
  }
  const double inv = 1.0 / static_cast<double>(test.size());
  for (std::size_t p = 0; p < pixels; ++p) {
    report.pixel_mse[p] *= inv;
    report.pixel_mae[p] *= inv;
    report.pixel_sam[p] *= inv;
  }
  report.mse = summarize(report.pixel_mse);
  report.mae = summarize(report.pixel_mae);
  report.sam = summarize(report.pixel_sam);
  return report;
}

}  // namespace hypercal
