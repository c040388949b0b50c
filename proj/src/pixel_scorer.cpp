#include "glyphforge/pixel_scorer.hpp"

#include <algorithm>
#include <cmath>

namespace glyphforge {

namespace {

// Summed-area table with a zero first row/column.
Raster<double> integral(const Raster<double>& p) {
  Raster<double> s = Raster<double>::Zero(p.rows() + 1, p.cols() + 1);
  for (Eigen::Index y = 0; y < p.rows(); ++y) {
    double row = 0;
    for (Eigen::Index x = 0; x < p.cols(); ++x) {
      row += p(y, x);
      s(y + 1, x + 1) = s(y, x + 1) + row;
    }
  }
  return s;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

FeatureBank compute_features(const Image& img) {
  const Image gray_img = to_grayscale(img);
  const Raster<double> g = gray_img.plane(0).cast<double>() / 255.0;
  const int w = img.width();
  const int h = img.height();
  const Raster<double> s1 = integral(g);
  const Raster<double> s2 = integral(g * g);

  FeatureBank bank;
  bank.width = w;
  bank.height = h;
  bank.values.resize(static_cast<Eigen::Index>(w) * h, kFeatureCount);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Eigen::Index row = static_cast<Eigen::Index>(y) * w + x;
      int f = 0;
      for (int r : kFeatureRadii) {
        const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
        const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
        const double n = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
        const double sum = s1(y1 + 1, x1 + 1) - s1(y0, x1 + 1) - s1(y1 + 1, x0) + s1(y0, x0);
        const double sq = s2(y1 + 1, x1 + 1) - s2(y0, x1 + 1) - s2(y1 + 1, x0) + s2(y0, x0);
        const double mean = sum / n;
        const double var = std::max(0.0, sq / n - mean * mean);
        const double gx = g(y, x1) - g(y, x0);
        const double gy = g(y1, x) - g(y0, x);
        bank.values(row, f++) = (mean - 0.5) * kMeanScale;
        bank.values(row, f++) = std::sqrt(var) * kStdScale;
        bank.values(row, f++) = 0.5 * std::sqrt(gx * gx + gy * gy) * kGradScale;
      }
    }
  return bank;
}

Raster<double> linear_scores(const PixelScorer& model, const FeatureBank& features) {
  if (model.weights.size() != kFeatureCount + 1) throw DimensionMismatch("PixelScorer: wrong weight count");
  const Eigen::VectorXd z =
      features.values * model.weights.head(kFeatureCount) + Eigen::VectorXd::Constant(features.values.rows(), model.weights(kFeatureCount));
  return Eigen::Map<const Raster<double>>(z.data(), features.height, features.width);
}

LogitMap score(const PixelScorer& model, const FeatureBank& features) {
  const Raster<double> z = linear_scores(model, features);
  return clamp_logits(z.unaryExpr([](double v) { return sigmoid(v); }));
}

LogitMap score(const PixelScorer& model, const Image& img) { return score(model, compute_features(img)); }

PseudoLabel pseudo_label(const PixelScorer& teacher, const FeatureBank& features, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("pseudo_label: threshold must be in (0, 1)");
  PseudoLabel out;
  out.logits = score(teacher, features);
  out.label = (out.logits >= threshold).cast<std::uint8_t>();
  return out;
}

PseudoLabel pseudo_label(const PixelScorer& teacher, const Image& img, double threshold) {
  return pseudo_label(teacher, compute_features(img), threshold);
}

PixelLoss masked_bce(const LogitMap& pred, const BinaryMask& target, const BinaryMask& e) {
  require_same_shape(pred, target, "masked_bce");
  require_same_shape(pred, e, "masked_bce");
  const auto n = (e != 0).count();
  if (n == 0) throw NoSupervisedPixels();
  const double inv_n = 1.0 / static_cast<double>(n);
  PixelLoss out;
  out.grad_score = Raster<double>::Zero(pred.rows(), pred.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!e.data()[i]) continue;
    const double p = std::clamp(pred.data()[i], kLogitEps, 1.0 - kLogitEps);
    const double t = target.data()[i] ? 1.0 : 0.0;
    total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    if (p > kLogitEps && p < 1.0 - kLogitEps) out.grad_score.data()[i] = (p - t) * inv_n;
  }
  out.loss = total * inv_n;
  return out;
}

Eigen::VectorXd weight_gradient(const FeatureBank& features, const Raster<double>& grad_score) {
  if (grad_score.rows() != features.height || grad_score.cols() != features.width)
    throw DimensionMismatch("weight_gradient: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> dz(grad_score.data(), grad_score.size());
  Eigen::VectorXd grad(kFeatureCount + 1);
  grad.head(kFeatureCount) = features.values.transpose() * dz;
  grad(kFeatureCount) = dz.sum();
  return grad;
}

WeightLoss masked_bce(const PixelScorer& model, const FeatureBank& features, const BinaryMask& target,
                      const BinaryMask& e) {
  const PixelLoss pixel = masked_bce(score(model, features), target, e);
  return {pixel.loss, weight_gradient(features, pixel.grad_score)};
}

PixelScorer ema_update(const PixelScorer& teacher, const PixelScorer& student, double alpha) {
  if (teacher.weights.size() != student.weights.size()) throw DimensionMismatch("ema_update: dimension mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("ema_update: alpha must be in [0, 1]");
  if (alpha == 1.0) return teacher;
  // Same as alpha * teacher + (1 - alpha) * student, but the gap to the
  // student scales by alpha with a single rounding per step.
  PixelScorer out;
  out.weights = student.weights + alpha * (teacher.weights - student.weights);
  return out;
}

}  // namespace glyphforge
