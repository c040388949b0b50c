#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "glyphforge/annotation_io.hpp"
#include "glyphforge/augment.hpp"
#include "glyphforge/glyph_segmentation.hpp"
#include "glyphforge/mixing.hpp"
#include "glyphforge/pixel_scorer.hpp"
#include "glyphforge/reliability.hpp"

namespace glyphforge {

class WorkerPool;

enum class TrainMode { GlyphMix, SyntheticOnly };
enum class OptimizerKind { AdamW, Sgd };

TrainMode parse_train_mode(const std::string& name);
const char* to_string(TrainMode mode);
OptimizerKind parse_optimizer(const std::string& name);
const char* to_string(OptimizerKind kind);

struct TrainConfig {
  std::size_t total_steps = 2000;
  std::size_t batch_size = 24;  // half synthetic, half real
  double ema_alpha = 0.996;
  double base_lr_coeff = 0.003;  // base_lr = coeff * batch_size / 256
  double warmup_fraction = 0.1;
  double lr_floor = 0.0;
  double gamma_start = 80.0;
  double gamma_end = 20.0;
  EntropyForm entropy_form = EntropyForm::OneSided;
  double binarize_threshold = 0.5;
  std::uint64_t seed = 0;

  OptimizerKind optimizer = OptimizerKind::AdamW;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double sgd_momentum = 0.9;

  TrainMode mode = TrainMode::GlyphMix;
  bool use_tim = true;
  /// Also supervise the student on the synthetic half directly (E = 1).
  bool synthetic_loss = true;
  Granularity granularity = Granularity::Char;
  /// Re-cluster glyphs on every augmented view instead of warping a cached mask.
  bool recompute_glyph_masks = false;
  /// Start student and teacher with bias = logit(mean text fraction of the
  /// synthetic labels) instead of zero.
  bool prior_init = true;

  GlyphParams glyph;
  TimParams tim;
  AugmentationSpec aug;

  unsigned workers = 1;
  std::size_t prefetch = 2;

  void validate() const;
  double base_lr() const { return base_lr_coeff * static_cast<double>(batch_size) / 256.0; }
  std::size_t warmup_steps() const;
  GammaSchedule gamma_schedule() const { return {gamma_start, gamma_end, total_steps}; }
};

/// Linear warm-up to base_lr at step warmup_steps() - 1, then cosine decay
/// reaching lr_floor at step total_steps - 1.
double lr_at(const TrainConfig& config, std::size_t step);

struct LabeledImage {
  Image image;
  std::vector<QuadBox> boxes;
};

/// Training sources. All images share one size.
struct TrainData {
  std::vector<LabeledImage> synthetic;
  std::vector<Image> real;

  void validate() const;
};

struct TrainState {
  PixelScorer student;
  PixelScorer teacher;
  Eigen::VectorXd moment1 = Eigen::VectorXd::Zero(kFeatureCount + 1);
  Eigen::VectorXd moment2 = Eigen::VectorXd::Zero(kFeatureCount + 1);
  std::size_t step = 0;
};

struct StepMetrics {
  std::size_t step = 0;
  double loss = 0.0;
  double gamma = 0.0;
  double kept_fraction = 0.0;
  double lr = 0.0;
};

std::string to_json_line(const StepMetrics& m);

/// Synthetic view after weak geometric augmentation.
struct SynthView {
  Image image;
  BinaryMask label;
  BinaryMask glyph_mask;
  FeatureBank features;
};

/// Weak view of a real image (teacher input) and its strong view (student input).
struct RealView {
  Image weak;
  FeatureBank weak_features;
  Image strong;
};

/// Everything a step needs that does not depend on model weights.
struct StepBatch {
  std::size_t step = 0;
  std::vector<SynthView> synthetic;
  std::vector<RealView> real;
};

/// Per-synthetic-image M_G and Y_l on the unaugmented image.
struct GlyphCache {
  std::vector<BinaryMask> glyph_masks;
  std::vector<BinaryMask> labels;
};

/// Initial weights: zero, with the prior bias when config.prior_init is set.
PixelScorer initial_model(const TrainConfig& config, const GlyphCache& cache);

GlyphCache build_glyph_cache(const TrainData& data, const GlyphParams& params, WorkerPool* pool = nullptr);

/// Draws the samples of `step` from streams split off config.seed.
StepBatch assemble_batch(const TrainConfig& config, const TrainData& data, const GlyphCache& cache,
                         std::size_t step, WorkerPool* pool = nullptr);

/// One optimizer step on the student followed by the EMA teacher update.
/// The teacher is only read until the final ema_update.
StepMetrics pretrain_step(TrainState& state, const StepBatch& batch, const TrainConfig& config,
                          WorkerPool* pool = nullptr);

struct TrainResult {
  TrainState state;
  std::vector<StepMetrics> metrics;
};

/// Runs config.total_steps steps. Batches are assembled ahead on a
/// background thread; results do not depend on the worker count.
TrainResult run_pretraining(const TrainConfig& config, const TrainData& data,
                            const std::function<void(const StepMetrics&)>& on_step = {});

/// Same, writing metrics.jsonl and checkpoint.bin under out_dir.
TrainResult run_pretraining(const TrainConfig& config, const TrainData& data, const std::filesystem::path& out_dir);

struct Checkpoint {
  PixelScorer student;
  PixelScorer teacher;
  std::size_t step = 0;
  std::uint64_t seed = 0;
  std::string config_json;
};

/// Binary layout: "GFCK", u32 version, u64 header length, JSON header,
/// then student and teacher weights as little-endian float64.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state, const TrainConfig& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct PixelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

/// Pixel-level precision/recall/F pooled over all images; prediction is score >= threshold.
PixelScore pixel_f_measure(const PixelScorer& model, std::span<const Image> images,
                           std::span<const BinaryMask> truths, double threshold = 0.5);

}  // namespace glyphforge
