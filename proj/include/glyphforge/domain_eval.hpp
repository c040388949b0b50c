#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "glyphforge/glyph_segmentation.hpp"
#include "glyphforge/mixing.hpp"
#include "glyphforge/student_teacher.hpp"

namespace glyphforge {

class WorkerPool;

inline constexpr int kIntensityBins = 32;
inline constexpr int kGradientBins = 32;
inline constexpr int kEdgeGrid = 4;
inline constexpr int kDomainFeatureCount = kIntensityBins + kGradientBins + kEdgeGrid * kEdgeGrid;

/// Whole-image descriptor: normalized grayscale histogram, normalized
/// gradient-magnitude histogram, and edge density on a 4x4 grid.
Eigen::VectorXd domain_features(const Image& img);

struct ClassifierParams {
  int iterations = 400;
  double learning_rate = 0.5;
  double l2 = 1e-3;
  double holdout_fraction = 0.2;
  double min_holdout_accuracy = 0.9;
};

/// Logistic regression on standardized domain features. Output is P(real).
struct DomainClassifier {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::VectorXd weights;
  double bias = 0.0;
  double holdout_accuracy = 0.0;

  double predict_features(const Eigen::VectorXd& features) const;
  double predict(const Image& img) const { return predict_features(domain_features(img)); }
};

class ClassifierNotSeparable : public Error {
 public:
  explicit ClassifierNotSeparable(double accuracy)
      : Error("classifier-not-separable: holdout accuracy " + std::to_string(accuracy) + " is below the gate"),
        accuracy_(accuracy) {}
  double accuracy() const { return accuracy_; }

 private:
  double accuracy_;
};

/// Trains on equal numbers of synthetic and real images (the larger set is
/// subsampled), holding out a fraction of each for the accuracy gate.
DomainClassifier train_domain_classifier(std::span<const Image> synthetic, std::span<const Image> real, Rng& rng,
                                         const ClassifierParams& params = {}, WorkerPool* pool = nullptr);

/// A mixer turns a (synthetic, real) pair into one image. `real2` is a
/// second real image for mixers that use one.
using MixFn = std::function<Image(const LabeledImage& synth, const Image& real, const Image& real2, Rng& rng)>;

struct Mixer {
  std::string name;
  MixFn fn;
};

/// glyphmix, mixup, cutmix, classmix, plus the reference mixers real
/// (returns the real image) and synthetic (returns the synthetic image).
Mixer make_mixer(const std::string& name, const GlyphParams& glyph = {}, const TimParams& tim = {});
std::vector<std::string> mixer_names();

struct DcaReport {
  std::string mixer;
  std::size_t pairs_evaluated = 0;
  std::size_t pairs_skipped = 0;
  double dca = 0.0;
  double holdout_accuracy = 0.0;
};

struct DcaOptions {
  std::size_t budget = 1000;
  bool soft = false;  // average P(real) instead of thresholding at 0.5
};

/// Monte-Carlo estimate over `budget` uniformly drawn (synthetic, real)
/// pairs. Pair i draws from Rng::split(seed, i), so the estimate does not
/// depend on the worker count. Pairs whose mixer throws are skipped.
DcaReport dca(const DomainClassifier& classifier, const Mixer& mixer, std::span<const LabeledImage> synthetic,
              std::span<const Image> real, std::uint64_t seed, const DcaOptions& options = {},
              WorkerPool* pool = nullptr);

/// All |synthetic| x |real| pairs; the second real image is the next one in order.
DcaReport dca_exhaustive(const DomainClassifier& classifier, const Mixer& mixer,
                         std::span<const LabeledImage> synthetic, std::span<const Image> real, std::uint64_t seed,
                         bool soft = false, WorkerPool* pool = nullptr);

}  // namespace glyphforge
