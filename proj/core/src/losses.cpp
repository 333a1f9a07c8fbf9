#include "hypercal/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hypercal/error.hpp"

namespace hypercal {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::shape_mismatch, "loss inputs differ in length (" +
                                               std::to_string(a.size()) + " vs " +
                                               std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw Error(ErrorCode::invalid_argument, "loss inputs are empty");
}

struct AngleTerms {
  double dot = 0.0;
  double pred_norm = 0.0;
  double target_norm = 0.0;
  double cosine = 0.0;
};

AngleTerms angle_terms(std::span<const double> pred, std::span<const double> target) {
  AngleTerms t;
  double pp = 0.0;
  double tt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    t.dot += pred[i] * target[i];
    pp += pred[i] * pred[i];
    tt += target[i] * target[i];
  }
  t.pred_norm = std::sqrt(pp);
  t.target_norm = std::sqrt(tt);
  if (t.pred_norm > 0.0 && t.target_norm > 0.0) {
    t.cosine = std::clamp(t.dot / (t.pred_norm * t.target_norm), -1.0, 1.0);
  }
  return t;
}

// Angle between unit vectors as 2 atan2(|u - v|, |u + v|); stays accurate
// near 0 and pi where acos of the cosine loses half its digits.
double stable_angle(std::span<const double> pred, std::span<const double> target,
                    const AngleTerms& t) {
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double u = pred[i] / t.pred_norm;
    const double v = target[i] / t.target_norm;
    diff += (u - v) * (u - v);
    sum += (u + v) * (u + v);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

}  // namespace

double loss_mse(std::span<const double> pred, std::span<const double> target) {
  require_same_length(pred, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

double loss_mae(std::span<const double> pred, std::span<const double> target) {
  require_same_length(pred, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - target[i]);
  return sum / static_cast<double>(pred.size());
}

SpectralAngle spectral_angle(std::span<const double> pred, std::span<const double> target) {
  require_same_length(pred, target);
  const AngleTerms t = angle_terms(pred, target);
  if (t.pred_norm == 0.0 || t.target_norm == 0.0) {
    return {std::numbers::pi / 2.0, true};
  }
  return {stable_angle(pred, target, t), false};
}

double loss_sam(std::span<const double> pred, std::span<const double> target) {
  return spectral_angle(pred, target).radians;
}

double accumulate_mse_gradient(std::span<const double> pred, std::span<const double> target,
                               double scale, std::span<double> grad) {
  require_same_length(pred, target);
  const double n = static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
    grad[i] += scale * 2.0 * d / n;
  }
  return sum / n;
}

double accumulate_sam_gradient(std::span<const double> pred, std::span<const double> target,
                               double scale, std::span<double> grad) {
  require_same_length(pred, target);
  const AngleTerms t = angle_terms(pred, target);
  if (t.pred_norm == 0.0 || t.target_norm == 0.0) return std::numbers::pi / 2.0;

  const double angle = stable_angle(pred, target, t);
  const double sin_sq = 1.0 - t.cosine * t.cosine;
  if (sin_sq <= 1e-24) return angle;

  // d(acos c)/dp = -(t/|t| - c p/|p|) / (|p| sqrt(1 - c^2))
  const double factor = -scale / (t.pred_norm * std::sqrt(sin_sq));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    grad[i] += factor * (target[i] / t.target_norm - t.cosine * pred[i] / t.pred_norm);
  }
  return angle;
}

}  // namespace hypercal
