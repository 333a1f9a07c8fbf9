#include "hypercal/mlp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "hypercal/error.hpp"
#include "hypercal/losses.hpp"

namespace hypercal {
namespace {

constexpr std::size_t H = kMlpHiddenWidth;

// y = W x + b, W row-major (rows x cols)
void affine(const double* w, const double* b, const double* x, std::size_t rows,
            std::size_t cols, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

struct Activations {
  std::array<double, H> z1{}, a1{}, z2{}, a2{};
  std::vector<double> z3, y;
};

void run_forward(const MlpLayout& L, const double* p, const double* x, Activations& act) {
  affine(p + L.w1(), p + L.b1(), x, H, L.bands, act.z1.data());
  for (std::size_t i = 0; i < H; ++i) act.a1[i] = std::max(0.0, act.z1[i]);
  affine(p + L.w2(), p + L.b2(), act.a1.data(), H, H, act.z2.data());
  for (std::size_t i = 0; i < H; ++i) act.a2[i] = std::max(0.0, act.z2[i]);
  affine(p + L.w3(), p + L.b3(), act.a2.data(), L.bands, H, act.z3.data());
  for (std::size_t i = 0; i < L.bands; ++i) act.y[i] = std::max(0.0, act.z3[i]);
}

}  // namespace

PixelMlp::PixelMlp(std::size_t bands) : layout_{bands}, params_(layout_.parameter_count(), 0.0) {
  if (bands == 0) throw Error(ErrorCode::invalid_argument, "MLP needs at least one band");
}

PixelMlp::PixelMlp(std::size_t bands, std::vector<double> parameters)
    : layout_{bands}, params_(std::move(parameters)) {
  if (bands == 0) throw Error(ErrorCode::invalid_argument, "MLP needs at least one band");
  if (params_.size() != layout_.parameter_count()) {
    throw Error(ErrorCode::shape_mismatch, "MLP parameter vector has wrong length");
  }
}

PixelMlp PixelMlp::initialized(std::size_t bands, std::uint64_t seed,
                               std::span<const double> output_bias) {
  PixelMlp net(bands);
  const MlpLayout& L = net.layout_;
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < count; ++i) net.params_[offset + i] = dist(rng);
  };
  fill(L.w1(), H * bands, bands);
  fill(L.w2(), H * H, H);
  // Small output weights keep the initial prediction close to the bias.
  const double limit3 = std::sqrt(6.0 / static_cast<double>(H)) * 0.1;
  std::uniform_real_distribution<double> dist3(-limit3, limit3);
  for (std::size_t i = 0; i < bands * H; ++i) net.params_[L.w3() + i] = dist3(rng);
  for (std::size_t i = 0; i < H; ++i) {
    net.params_[L.b1() + i] = 0.01;
    net.params_[L.b2() + i] = 0.01;
  }
  for (std::size_t i = 0; i < bands; ++i) {
    net.params_[L.b3() + i] = i < output_bias.size() ? output_bias[i] : 0.0;
  }
  return net;
}

void PixelMlp::forward(std::span<const double> input, std::span<double> output) const {
  forward(params_, layout_.bands, input, output);
}

void PixelMlp::forward(std::span<const double> parameters, std::size_t bands,
                       std::span<const double> input, std::span<double> output) {
  const MlpLayout layout{bands};
  if (input.size() != bands || output.size() != bands ||
      parameters.size() != layout.parameter_count()) {
    throw Error(ErrorCode::shape_mismatch, "MLP input/output length does not match band count");
  }
  Activations act;
  act.z3.resize(bands);
  act.y.resize(bands);
  run_forward(layout, parameters.data(), input.data(), act);
  std::copy(act.y.begin(), act.y.end(), output.begin());
}

double composite_loss(const PixelMlp& net, const SampleBatch& batch, double alpha,
                      std::span<double> gradient) {
  const MlpLayout& L = net.layout();
  const std::size_t bands = L.bands;
  if (batch.bands != bands || batch.count == 0 ||
      batch.inputs.size() < batch.count * bands || batch.targets.size() < batch.count * bands) {
    throw Error(ErrorCode::shape_mismatch, "batch does not match the network");
  }
  const bool want_grad = !gradient.empty();
  if (want_grad) {
    if (gradient.size() != L.parameter_count()) {
      throw Error(ErrorCode::shape_mismatch, "gradient buffer has wrong length");
    }
    std::fill(gradient.begin(), gradient.end(), 0.0);
  }

  const double* p = net.parameters().data();
  const double inv_n = 1.0 / static_cast<double>(batch.count);
  Activations act;
  act.z3.resize(bands);
  act.y.resize(bands);
  std::vector<double> dy(bands);
  std::array<double, H> d2{}, d1{};
  double total = 0.0;

  for (std::size_t n = 0; n < batch.count; ++n) {
    const double* x = batch.inputs.data() + n * bands;
    std::span<const double> target(batch.targets.data() + n * bands, bands);
    run_forward(L, p, x, act);

    if (!want_grad) {
      total += loss_mse(act.y, target) + alpha * loss_sam(act.y, target);
      continue;
    }

    std::fill(dy.begin(), dy.end(), 0.0);
    total += accumulate_mse_gradient(act.y, target, inv_n, dy);
    total += alpha * accumulate_sam_gradient(act.y, target, alpha * inv_n, dy);

    double* g = gradient.data();
    // output layer: dz3 = dy * relu'(z3)
    std::fill(d2.begin(), d2.end(), 0.0);
    for (std::size_t o = 0; o < bands; ++o) {
      const double dz = act.z3[o] > 0.0 ? dy[o] : 0.0;
      if (dz == 0.0) continue;
      g[L.b3() + o] += dz;
      double* gw = g + L.w3() + o * H;
      const double* w = p + L.w3() + o * H;
      for (std::size_t h = 0; h < H; ++h) {
        gw[h] += dz * act.a2[h];
        d2[h] += w[h] * dz;
      }
    }
    std::fill(d1.begin(), d1.end(), 0.0);
    for (std::size_t o = 0; o < H; ++o) {
      const double dz = act.z2[o] > 0.0 ? d2[o] : 0.0;
      if (dz == 0.0) continue;
      g[L.b2() + o] += dz;
      double* gw = g + L.w2() + o * H;
      const double* w = p + L.w2() + o * H;
      for (std::size_t h = 0; h < H; ++h) {
        gw[h] += dz * act.a1[h];
        d1[h] += w[h] * dz;
      }
    }
    for (std::size_t o = 0; o < H; ++o) {
      const double dz = act.z1[o] > 0.0 ? d1[o] : 0.0;
      if (dz == 0.0) continue;
      g[L.b1() + o] += dz;
      double* gw = g + L.w1() + o * bands;
      for (std::size_t i = 0; i < bands; ++i) gw[i] += dz * x[i];
    }
  }
  return total * inv_n;
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void AdamOptimizer::step(std::span<double> parameters, std::span<const double> gradient) {
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * gradient[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * gradient[i] * gradient[i];
    const double m_hat = m_[i] / correction1;
    const double v_hat = v_[i] / correction2;
    parameters[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

bool EarlyStopping::update(double loss) {
  ++epochs_;
  if (!has_best_ || loss < best_ - min_delta_) {
    has_best_ = true;
    best_ = loss;
    best_epoch_ = epochs_;
    stale_ = 0;
    return false;
  }
  ++stale_;
  return stale_ >= patience_;
}

}  // namespace hypercal
