#include "glyphforge/student_teacher.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <numbers>
#include <thread>

#include <nlohmann/json.hpp>

#include "glyphforge/config.hpp"
#include "glyphforge/image_io.hpp"
#include "glyphforge/worker_pool.hpp"

namespace glyphforge {

TrainMode parse_train_mode(const std::string& name) {
  if (name == "glyphmix") return TrainMode::GlyphMix;
  if (name == "synthetic_only") return TrainMode::SyntheticOnly;
  throw Error("unknown training mode '" + name + "' (expected glyphmix or synthetic_only)");
}

const char* to_string(TrainMode mode) { return mode == TrainMode::GlyphMix ? "glyphmix" : "synthetic_only"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adamw") return OptimizerKind::AdamW;
  if (name == "sgd") return OptimizerKind::Sgd;
  throw Error("unknown optimizer '" + name + "' (expected adamw or sgd)");
}

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::AdamW ? "adamw" : "sgd"; }

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) throw Error("TrainConfig: batch_size must be even and >= 2");
  if (!(ema_alpha >= 0.0 && ema_alpha < 1.0)) throw Error("TrainConfig: ema_alpha must be in [0, 1)");
  if (!(base_lr_coeff > 0.0)) throw Error("TrainConfig: base_lr_coeff must be > 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) throw Error("TrainConfig: warmup_fraction must be in [0, 1]");
  if (lr_floor < 0.0 || lr_floor > base_lr()) throw Error("TrainConfig: lr_floor must be in [0, base_lr]");
  if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0))
    throw Error("TrainConfig: binarize_threshold must be in (0, 1)");
  if (weight_decay < 0.0) throw Error("TrainConfig: weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw Error("TrainConfig: Adam betas must be in [0, 1)");
  if (!(adam_eps > 0.0)) throw Error("TrainConfig: adam_eps must be > 0");
  if (!(sgd_momentum >= 0.0 && sgd_momentum < 1.0)) throw Error("TrainConfig: sgd_momentum must be in [0, 1)");
  if (workers < 1) throw Error("TrainConfig: workers must be >= 1");
  GammaSchedule{gamma_start, gamma_end, std::max<std::size_t>(total_steps, 1)}.validate();
  glyph.validate();
  tim.validate();
  aug.validate();
}

std::size_t TrainConfig::warmup_steps() const {
  if (total_steps == 0) return 0;
  const auto w = static_cast<std::size_t>(std::ceil(warmup_fraction * static_cast<double>(total_steps)));
  return std::clamp<std::size_t>(w, 1, total_steps);
}

double lr_at(const TrainConfig& config, std::size_t step) {
  if (step >= config.total_steps) throw Error("lr_at: step out of range");
  const double base = config.base_lr();
  const std::size_t warm = config.warmup_steps();
  if (step + 1 < warm) return base * static_cast<double>(step + 1) / static_cast<double>(warm);
  const std::size_t span = config.total_steps - warm;  // steps from warm-1 to T-1
  if (span == 0) return base;
  const double progress = static_cast<double>(step + 1 - warm) / static_cast<double>(span);
  return config.lr_floor + (base - config.lr_floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void TrainData::validate() const {
  if (synthetic.empty()) throw Error("training data: no synthetic images");
  const int w = synthetic.front().image.width();
  const int h = synthetic.front().image.height();
  auto check = [&](const Image& img) {
    if (img.width() != w || img.height() != h) throw DimensionMismatch("training data: all images must share one size");
    if (img.channels() != 3) throw DimensionMismatch("training data: images must be RGB");
  };
  for (const auto& s : synthetic) check(s.image);
  for (const auto& r : real) check(r);
}

std::string to_json_line(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["loss"] = m.loss;
  j["gamma"] = m.gamma;
  j["kept_fraction"] = m.kept_fraction;
  j["lr"] = m.lr;
  return j.dump();
}

GlyphCache build_glyph_cache(const TrainData& data, const GlyphParams& params, WorkerPool* pool) {
  GlyphCache cache;
  const std::size_t n = data.synthetic.size();
  cache.glyph_masks.resize(n);
  cache.labels.resize(n);
  auto work = [&](std::size_t i) {
    const auto& s = data.synthetic[i];
    cache.glyph_masks[i] = build_glyph_mask(s.image, s.boxes, params).mask;
    cache.labels[i] = label_map(s.boxes, s.image.width(), s.image.height());
  };
  if (pool)
    pool->parallel_for(n, work);
  else
    for (std::size_t i = 0; i < n; ++i) work(i);
  return cache;
}

PixelScorer initial_model(const TrainConfig& config, const GlyphCache& cache) {
  PixelScorer model;
  if (!config.prior_init || cache.labels.empty()) return model;
  double fraction = 0.0;
  for (const auto& l : cache.labels) fraction += static_cast<double>(popcount(l)) / static_cast<double>(l.size());
  fraction = std::clamp(fraction / static_cast<double>(cache.labels.size()), 0.01, 0.99);
  model.weights(kFeatureCount) = std::log(fraction / (1.0 - fraction));
  return model;
}

namespace {

// Stream tags under Rng::split(seed, step, tag + i).
constexpr std::uint64_t kSynthStream = 0;
constexpr std::uint64_t kRealStream = 1ull << 32;
constexpr std::uint64_t kMixStream = 2ull << 32;

bool uses_real(const TrainConfig& config) { return config.mode == TrainMode::GlyphMix; }

}  // namespace

StepBatch assemble_batch(const TrainConfig& config, const TrainData& data, const GlyphCache& cache, std::size_t step,
                         WorkerPool* pool) {
  const std::size_t half = config.batch_size / 2;
  StepBatch batch;
  batch.step = step;
  batch.synthetic.resize(half);
  const bool real = uses_real(config);
  if (real) {
    if (data.real.empty()) throw Error("training data: no real images");
    batch.real.resize(half);
  }
  auto work = [&](std::size_t k) {
    if (k < half) {
      Rng rng = Rng::split(config.seed, step, kSynthStream + k);
      const auto idx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(data.synthetic.size()) - 1));
      const GeometricTransform g = sample_geometric(config.aug, rng);
      const auto& src = data.synthetic[idx];
      SynthView& v = batch.synthetic[k];
      v.image = warp_image(src.image, g);
      v.label = warp_mask(cache.labels[idx], g);
      if (config.recompute_glyph_masks) {
        std::vector<QuadBox> boxes;
        boxes.reserve(src.boxes.size());
        for (const auto& b : src.boxes) boxes.push_back(warp_box(b, g, src.image.width(), src.image.height()));
        v.glyph_mask = build_glyph_mask(v.image, boxes, config.glyph).mask;
      } else {
        v.glyph_mask = warp_mask(cache.glyph_masks[idx], g);
      }
      v.features = compute_features(v.image);
    } else {
      const std::size_t i = k - half;
      Rng rng = Rng::split(config.seed, step, kRealStream + i);
      const auto idx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(data.real.size()) - 1));
      const GeometricTransform g = sample_geometric(config.aug, rng);
      const PhotometricTransform p = sample_photometric(config.aug, rng);
      RealView& v = batch.real[i];
      v.weak = warp_image(data.real[idx], g);
      v.weak_features = compute_features(v.weak);
      v.strong = apply_photometric(v.weak, p);
    }
  };
  const std::size_t n = half + batch.real.size();
  if (pool)
    pool->parallel_for(n, work);
  else
    for (std::size_t k = 0; k < n; ++k) work(k);
  return batch;
}

namespace {

struct SampleResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
  double kept = 0.0;
};

void optimizer_step(TrainState& state, const Eigen::VectorXd& grad, double lr, const TrainConfig& config) {
  Eigen::VectorXd& w = state.student.weights;
  Eigen::VectorXd decay = config.weight_decay * w;
  decay(kFeatureCount) = 0.0;  // no decay on the bias
  if (config.optimizer == OptimizerKind::AdamW) {
    const double t = static_cast<double>(state.step + 1);
    state.moment1 = config.adam_beta1 * state.moment1 + (1.0 - config.adam_beta1) * grad;
    state.moment2 = config.adam_beta2 * state.moment2 + (1.0 - config.adam_beta2) * grad.cwiseProduct(grad);
    const Eigen::ArrayXd m_hat = state.moment1.array() / (1.0 - std::pow(config.adam_beta1, t));
    const Eigen::ArrayXd v_hat = state.moment2.array() / (1.0 - std::pow(config.adam_beta2, t));
    w -= lr * ((m_hat / (v_hat.sqrt() + config.adam_eps)).matrix() + decay);
  } else {
    state.moment1 = config.sgd_momentum * state.moment1 + grad;
    w -= lr * (state.moment1 + decay);
  }
}

}  // namespace

StepMetrics pretrain_step(TrainState& state, const StepBatch& batch, const TrainConfig& config, WorkerPool* pool) {
  if (batch.synthetic.empty()) throw Error("pretrain_step: empty synthetic batch");
  const bool mix = uses_real(config);
  if (mix && batch.real.size() != batch.synthetic.size())
    throw Error("pretrain_step: synthetic and real halves differ in size");
  const std::size_t n_synth = batch.synthetic.size();
  const bool synth_terms = !mix || config.synthetic_loss;
  const std::size_t n_mix = mix ? batch.real.size() : 0;
  const std::size_t n_synth_terms = synth_terms ? n_synth : 0;

  StepMetrics metrics;
  metrics.step = batch.step;
  metrics.gamma = gamma_at(config.gamma_schedule(), batch.step);
  metrics.lr = lr_at(config, batch.step);

  const PixelScorer& teacher = state.teacher;
  const PixelScorer& student = state.student;

  // Teacher pass on the weak real views.
  std::vector<RealTriple> triples(n_mix);
  std::vector<double> kept(n_mix, 0.0);
  auto teacher_work = [&](std::size_t i) {
    const RealView& v = batch.real[i];
    const PseudoLabel pl = pseudo_label(teacher, v.weak_features, config.binarize_threshold);
    BinaryMask e = reliability_mask(pl.logits, metrics.gamma, config.entropy_form);
    kept[i] = static_cast<double>(popcount(e)) / static_cast<double>(e.size());
    triples[i] = RealTriple{v.strong, pl.label, std::move(e)};
  };

  std::vector<SampleResult> results(n_mix + n_synth_terms);
  auto student_work = [&](std::size_t k) {
    SampleResult& r = results[k];
    if (k < n_mix) {
      const SynthView& s = batch.synthetic[k];
      Rng rng = Rng::split(config.seed, batch.step, kMixStream + k);
      const MixPair g = glyphmix(triples[k], triples[(k + 1) % n_mix], SynthPair{s.image, s.label}, s.glyph_mask,
                                 config.tim, rng, config.use_tim);
      const WeightLoss wl = masked_bce(student, compute_features(g.image), g.label, g.reliability);
      r.loss = wl.loss;
      r.grad = wl.gradient;
    } else {
      const SynthView& s = batch.synthetic[k - n_mix];
      const WeightLoss wl = masked_bce(student, s.features, s.label, BinaryMask::Ones(s.label.rows(), s.label.cols()));
      r.loss = wl.loss;
      r.grad = wl.gradient;
    }
  };

  if (pool) {
    pool->parallel_for(n_mix, teacher_work);
    pool->parallel_for(results.size(), student_work);
  } else {
    for (std::size_t i = 0; i < n_mix; ++i) teacher_work(i);
    for (std::size_t k = 0; k < results.size(); ++k) student_work(k);
  }

  // Reduce in index order so the sum does not depend on scheduling.
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kFeatureCount + 1);
  double loss = 0.0;
  for (const auto& r : results) {
    loss += r.loss;
    grad += r.grad;
  }
  const double inv = 1.0 / static_cast<double>(results.size());
  metrics.loss = loss * inv;
  grad *= inv;
  double kept_sum = 0.0;
  for (double v : kept) kept_sum += v;
  metrics.kept_fraction = n_mix ? kept_sum / static_cast<double>(n_mix) : 0.0;

  optimizer_step(state, grad, metrics.lr, config);
  state.teacher = ema_update(state.teacher, state.student, config.ema_alpha);
  ++state.step;
  return metrics;
}

TrainResult run_pretraining(const TrainConfig& config, const TrainData& data,
                            const std::function<void(const StepMetrics&)>& on_step) {
  config.validate();
  data.validate();
  if (uses_real(config) && data.real.empty()) throw Error("training data: no real images");

  TrainResult result;
  WorkerPool step_pool(config.workers);
  const GlyphCache cache = build_glyph_cache(data, config.glyph, &step_pool);
  result.state.student = initial_model(config, cache);
  result.state.teacher = result.state.student;

  if (config.total_steps == 0) return result;

  BoundedQueue<StepBatch> queue(config.prefetch);
  std::exception_ptr producer_error;
  std::jthread producer([&] {
    try {
      WorkerPool pool(config.workers);
      for (std::size_t step = 0; step < config.total_steps; ++step)
        if (!queue.push(assemble_batch(config, data, cache, step, &pool))) return;
    } catch (...) {
      producer_error = std::current_exception();
    }
    queue.close();
  });

  try {
    for (std::size_t step = 0; step < config.total_steps; ++step) {
      std::optional<StepBatch> batch = queue.pop();
      if (!batch) break;
      const StepMetrics m = pretrain_step(result.state, *batch, config, &step_pool);
      result.metrics.push_back(m);
      if (on_step) on_step(m);
    }
  } catch (...) {
    queue.close();
    throw;
  }
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);
  if (result.metrics.size() != config.total_steps) throw Error("pretraining stopped early");
  return result;
}

TrainResult run_pretraining(const TrainConfig& config, const TrainData& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto metrics_path = out_dir / "metrics.jsonl";
  std::ofstream metrics(metrics_path, std::ios::trunc);
  if (!metrics) throw IoError("cannot open " + metrics_path.string() + " for writing");
  TrainResult result = run_pretraining(config, data, [&](const StepMetrics& m) {
    metrics << to_json_line(m) << '\n';
    if (!metrics) throw IoError("step " + std::to_string(m.step) + ": failed writing " + metrics_path.string());
  });
  metrics.flush();
  try {
    save_checkpoint(out_dir / "checkpoint.bin", result.state, config);
  } catch (const IoError& e) {
    throw IoError("step " + std::to_string(result.state.step) + ": " + e.what());
  }
  return result;
}

namespace {

constexpr char kMagic[4] = {'G', 'F', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("checkpoint truncated");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  return v;
}

void put_weights(std::string& out, const PixelScorer& m) {
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) put_le(out, std::bit_cast<std::uint64_t>(m.weights(i)));
}

PixelScorer get_weights(const std::string& in, std::size_t& pos, std::size_t count) {
  PixelScorer m;
  m.weights.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i)
    m.weights(static_cast<Eigen::Index>(i)) = std::bit_cast<double>(get_le<std::uint64_t>(in, pos));
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainState& state, const TrainConfig& config) {
  GlobalConfig global;
  global.train = config;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : to_key_values(global))
    if (k != "log_level" && k != "out_dir") cfg[k] = v;
  nlohmann::ordered_json header;
  header["format"] = "glyphforge-checkpoint";
  header["step"] = state.step;
  header["seed"] = config.seed;
  header["weight_count"] = state.student.weights.size();
  header["config"] = cfg;
  const std::string header_text = header.dump();

  std::string blob(kMagic, 4);
  put_le(blob, kCheckpointVersion);
  put_le(blob, static_cast<std::uint64_t>(header_text.size()));
  blob += header_text;
  put_weights(blob, state.student);
  put_weights(blob, state.teacher);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() < 4 || std::memcmp(blob.data(), kMagic, 4) != 0) throw IoError(path.string() + ": not a checkpoint");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(blob, pos);
  if (version != kCheckpointVersion)
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(blob, pos);
  if (pos + header_len > blob.size()) throw IoError(path.string() + ": checkpoint truncated");
  const std::string header_text = blob.substr(pos, header_len);
  pos += header_len;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad checkpoint header: " + e.what());
  }
  const auto count = header.at("weight_count").get<std::size_t>();
  Checkpoint ck;
  ck.student = get_weights(blob, pos, count);
  ck.teacher = get_weights(blob, pos, count);
  ck.step = header.at("step").get<std::size_t>();
  ck.seed = header.at("seed").get<std::uint64_t>();
  ck.config_json = header.at("config").dump();
  return ck;
}

PixelScore pixel_f_measure(const PixelScorer& model, std::span<const Image> images, std::span<const BinaryMask> truths,
                           double threshold) {
  if (images.size() != truths.size()) throw DimensionMismatch("pixel_f_measure: image and truth counts differ");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    require_same_shape(images[i], truths[i], "pixel_f_measure");
    const BinaryMask pred = (score(model, images[i]) >= threshold).cast<std::uint8_t>();
    const auto t = truths[i].cast<std::int64_t>();
    const auto p = pred.cast<std::int64_t>();
    tp += (p * t).sum();
    fp += (p * (1 - t)).sum();
    fn += ((1 - p) * t).sum();
  }
  PixelScore s;
  s.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f_measure = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace glyphforge
