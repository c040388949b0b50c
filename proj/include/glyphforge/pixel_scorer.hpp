#pragma once

#include <array>
#include <functional>

#include <Eigen/Core>

#include "glyphforge/core_types.hpp"

namespace glyphforge {

inline constexpr int kFeatureRadii[] = {1, 2, 4};
/// Local mean, local std and gradient magnitude at each radius.
inline constexpr int kFeatureCount = 9;

// Fixed normalization. Before the gain, the mean lies in [-1, 1] and std and
// gradient roughly in [0, 2]; the gain sets the logit range one optimizer
// step can move.
inline constexpr double kFeatureGain = 10.0;
inline constexpr double kMeanScale = 2.0 * kFeatureGain;
inline constexpr double kStdScale = 4.0 * kFeatureGain;
inline constexpr double kGradScale = 2.0 * kFeatureGain;

/// Per-pixel features of one image: N x 9, row i is pixel (i / W, i % W).
struct FeatureBank {
  int width = 0;
  int height = 0;
  Eigen::Matrix<double, Eigen::Dynamic, kFeatureCount, Eigen::RowMajor> values;
};

/// Features on the grayscale image scaled to [0, 1]. Windows are clipped at
/// the border; gradient taps clamp to the edge. Features are affinely
/// normalized by fixed constants so that weights share one scale.
FeatureBank compute_features(const Image& img);

/// Linear model over the feature bank plus a bias (last weight).
struct PixelScorer {
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(kFeatureCount + 1);

  static PixelScorer zeros() { return {}; }
  bool operator==(const PixelScorer& o) const { return weights == o.weights; }
};

/// Raw linear scores z (before the sigmoid).
Raster<double> linear_scores(const PixelScorer& model, const FeatureBank& features);

/// sigmoid(z), clamped into [eps, 1 - eps].
LogitMap score(const PixelScorer& model, const FeatureBank& features);
LogitMap score(const PixelScorer& model, const Image& img);

struct PseudoLabel {
  LogitMap logits;
  BinaryMask label;
};

/// Teacher prediction and its binarization (1 where logit >= threshold).
/// The teacher is taken by const reference: producing pseudo-labels never
/// touches its weights.
PseudoLabel pseudo_label(const PixelScorer& teacher, const Image& img, double threshold);
PseudoLabel pseudo_label(const PixelScorer& teacher, const FeatureBank& features, double threshold);

/// Loss value and its gradient with respect to the pre-sigmoid score of each pixel.
struct PixelLoss {
  double loss = 0.0;
  Raster<double> grad_score;
};

/// A per-pixel supervised loss: (prediction, target, supervised-pixel mask).
using PixelLossFn = std::function<PixelLoss(const LogitMap&, const BinaryMask&, const BinaryMask&)>;

class NoSupervisedPixels : public Error {
 public:
  NoSupervisedPixels() : Error("masked loss: reliability mask selects no pixels") {}
};

/// Mean binary cross-entropy over pixels with e = 1. Pixels whose prediction
/// sits on the clamp bound contribute no gradient.
PixelLoss masked_bce(const LogitMap& pred, const BinaryMask& target, const BinaryMask& e);

struct WeightLoss {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Chain rule from per-pixel score gradients to weight space.
Eigen::VectorXd weight_gradient(const FeatureBank& features, const Raster<double>& grad_score);

WeightLoss masked_bce(const PixelScorer& model, const FeatureBank& features, const BinaryMask& target,
                      const BinaryMask& e);

/// teacher' = alpha * teacher + (1 - alpha) * student.
PixelScorer ema_update(const PixelScorer& teacher, const PixelScorer& student, double alpha);

}  // namespace glyphforge
