#include "glyphforge/domain_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glyphforge/engine.hpp"
#include "glyphforge/worker_pool.hpp"

namespace glyphforge {

namespace {

constexpr double kGradientRange = 0.5;  // magnitudes above land in the last bin
constexpr double kEdgeThreshold = 0.1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

template <typename Fn>
void for_each_index(std::size_t n, WorkerPool* pool, Fn&& fn) {
  if (pool)
    pool->parallel_for(n, fn);
  else
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace

Eigen::VectorXd domain_features(const Image& img) {
  const Image gray_img = to_grayscale(img);
  const Raster<double> g = gray_img.plane(0).cast<double>() / 255.0;
  const int w = img.width();
  const int h = img.height();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kDomainFeatureCount);
  Eigen::Array<double, kEdgeGrid, kEdgeGrid> cell_px = Eigen::Array<double, kEdgeGrid, kEdgeGrid>::Zero();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int ib = std::min(kIntensityBins - 1, static_cast<int>(g(y, x) * kIntensityBins));
      f(ib) += 1.0;
      const double gx = 0.5 * (g(y, std::min(x + 1, w - 1)) - g(y, std::max(x - 1, 0)));
      const double gy = 0.5 * (g(std::min(y + 1, h - 1), x) - g(std::max(y - 1, 0), x));
      const double mag = std::sqrt(gx * gx + gy * gy);
      const int gb = std::min(kGradientBins - 1, static_cast<int>(mag / kGradientRange * kGradientBins));
      f(kIntensityBins + gb) += 1.0;
      const int cy = y * kEdgeGrid / h;
      const int cx = x * kEdgeGrid / w;
      cell_px(cy, cx) += 1.0;
      if (mag > kEdgeThreshold) f(kIntensityBins + kGradientBins + cy * kEdgeGrid + cx) += 1.0;
    }
  const double n = static_cast<double>(w) * h;
  f.head(kIntensityBins + kGradientBins) /= n;
  for (int cy = 0; cy < kEdgeGrid; ++cy)
    for (int cx = 0; cx < kEdgeGrid; ++cx) {
      const double px = cell_px(cy, cx);
      if (px > 0) f(kIntensityBins + kGradientBins + cy * kEdgeGrid + cx) /= px;
    }
  return f;
}

double DomainClassifier::predict_features(const Eigen::VectorXd& features) const {
  const Eigen::VectorXd z = ((features - mean).array() / scale.array()).matrix();
  return sigmoid(weights.dot(z) + bias);
}

DomainClassifier train_domain_classifier(std::span<const Image> synthetic, std::span<const Image> real, Rng& rng,
                                         const ClassifierParams& params, WorkerPool* pool) {
  if (synthetic.empty() || real.empty()) throw Error("train_domain_classifier: both image sets must be non-empty");
  if (!(params.holdout_fraction > 0.0 && params.holdout_fraction < 1.0))
    throw Error("train_domain_classifier: holdout_fraction must be in (0, 1)");

  const std::size_t n = std::min(synthetic.size(), real.size());
  auto pick = [&](std::size_t total) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = total; i > 1; --i)
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    idx.resize(n);
    return idx;
  };
  const auto synth_idx = pick(synthetic.size());
  const auto real_idx = pick(real.size());

  // Rows 0..n-1 synthetic (label 0), n..2n-1 real (label 1).
  Eigen::MatrixXd x(static_cast<Eigen::Index>(2 * n), kDomainFeatureCount);
  for_each_index(2 * n, pool, [&](std::size_t i) {
    const Image& img = i < n ? synthetic[synth_idx[i]] : real[real_idx[i - n]];
    x.row(static_cast<Eigen::Index>(i)) = domain_features(img).transpose();
  });

  const auto n_hold = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.holdout_fraction * n)));
  if (n_hold >= n) throw Error("train_domain_classifier: too few images for a holdout split");
  const std::size_t n_train = n - n_hold;
  std::vector<Eigen::Index> train_rows, hold_rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? train_rows : hold_rows;
    dst.push_back(static_cast<Eigen::Index>(i));
    dst.push_back(static_cast<Eigen::Index>(n + i));
  }
  auto label = [&](Eigen::Index row) { return row >= static_cast<Eigen::Index>(n) ? 1.0 : 0.0; };

  const Eigen::MatrixXd xt = x(train_rows, Eigen::all);
  DomainClassifier clf;
  clf.mean = xt.colwise().mean().transpose();
  clf.scale = ((xt.rowwise() - clf.mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
  clf.scale = clf.scale.unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; });
  const Eigen::MatrixXd z = ((xt.rowwise() - clf.mean.transpose()).array().rowwise() / clf.scale.transpose().array()).matrix();
  Eigen::VectorXd y(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) y(i) = label(train_rows[static_cast<std::size_t>(i)]);

  clf.weights = Eigen::VectorXd::Zero(kDomainFeatureCount);
  const double inv = 1.0 / static_cast<double>(z.rows());
  for (int it = 0; it < params.iterations; ++it) {
    const Eigen::VectorXd p = ((z * clf.weights).array() + clf.bias).unaryExpr([](double v) { return sigmoid(v); }).matrix();
    const Eigen::VectorXd r = p - y;
    clf.weights -= params.learning_rate * (inv * (z.transpose() * r) + params.l2 * clf.weights);
    clf.bias -= params.learning_rate * inv * r.sum();
  }

  std::size_t correct = 0;
  for (Eigen::Index row : hold_rows) {
    const double p = clf.predict_features(x.row(row).transpose());
    if ((p >= 0.5 ? 1.0 : 0.0) == label(row)) ++correct;
  }
  clf.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(hold_rows.size());
  if (clf.holdout_accuracy < params.min_holdout_accuracy) throw ClassifierNotSeparable(clf.holdout_accuracy);
  return clf;
}

std::vector<std::string> mixer_names() { return {"glyphmix", "mixup", "cutmix", "classmix", "real", "synthetic"}; }

Mixer make_mixer(const std::string& name, const GlyphParams& glyph, const TimParams& tim) {
  if (name == "glyphmix")
    return {name, [glyph, tim](const LabeledImage& s, const Image& real, const Image& real2, Rng& rng) {
              const PreparedSynth prepared = prepare_synth(s.image, s.boxes, glyph);
              const int w = real.width(), h = real.height();
              const RealTriple first{real, BinaryMask::Zero(h, w), BinaryMask::Ones(h, w)};
              const RealTriple second{real2, BinaryMask::Zero(h, w), BinaryMask::Ones(h, w)};
              return generate_glyphmix_pair(prepared, first, second, tim, true, rng).image;
            }};
  if (name == "mixup")
    return {name, [](const LabeledImage& s, const Image& real, const Image&, Rng& rng) {
              return mixup(real, s.image, rng.uniform());
            }};
  if (name == "cutmix")
    return {name, [](const LabeledImage& s, const Image& real, const Image&, Rng& rng) {
              return cutmix(real, s.image, random_cutmix_rect(real.width(), real.height(), rng));
            }};
  if (name == "classmix")
    return {name, [](const LabeledImage& s, const Image& real, const Image&, Rng&) {
              return classmix(real, s.image, label_map(s.boxes, real.width(), real.height()));
            }};
  if (name == "real") return {name, [](const LabeledImage&, const Image& real, const Image&, Rng&) { return real; }};
  if (name == "synthetic")
    return {name, [](const LabeledImage& s, const Image&, const Image&, Rng&) { return s.image; }};
  throw Error("unknown mixer '" + name + "'");
}

namespace {

struct PairOutcome {
  double score = 0.0;
  bool skipped = false;
};

PairOutcome evaluate_pair(const DomainClassifier& clf, const Mixer& mixer, const LabeledImage& s, const Image& r1,
                          const Image& r2, Rng& rng, bool soft) {
  try {
    const double p = clf.predict(mixer.fn(s, r1, r2, rng));
    return {soft ? p : (p >= 0.5 ? 1.0 : 0.0), false};
  } catch (const std::exception&) {
    return {0.0, true};
  }
}

DcaReport summarize(const DomainClassifier& clf, const Mixer& mixer, const std::vector<PairOutcome>& outcomes) {
  DcaReport report;
  report.mixer = mixer.name;
  report.holdout_accuracy = clf.holdout_accuracy;
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.skipped) {
      ++report.pairs_skipped;
      continue;
    }
    ++report.pairs_evaluated;
    sum += o.score;
  }
  report.dca = report.pairs_evaluated ? sum / static_cast<double>(report.pairs_evaluated) : 0.0;
  return report;
}

}  // namespace

DcaReport dca(const DomainClassifier& classifier, const Mixer& mixer, std::span<const LabeledImage> synthetic,
              std::span<const Image> real, std::uint64_t seed, const DcaOptions& options, WorkerPool* pool) {
  if (options.budget < 1) throw Error("dca: budget must be >= 1");
  if (synthetic.empty() || real.empty()) throw Error("dca: both image sets must be non-empty");
  std::vector<PairOutcome> outcomes(options.budget);
  const auto ns = static_cast<std::int64_t>(synthetic.size());
  const auto nr = static_cast<std::int64_t>(real.size());
  for_each_index(options.budget, pool, [&](std::size_t i) {
    Rng rng = Rng::split(seed, i);
    const auto si = static_cast<std::size_t>(rng.uniform_int(0, ns - 1));
    const auto ri = static_cast<std::size_t>(rng.uniform_int(0, nr - 1));
    const auto r2 = static_cast<std::size_t>(rng.uniform_int(0, nr - 1));
    outcomes[i] = evaluate_pair(classifier, mixer, synthetic[si], real[ri], real[r2], rng, options.soft);
  });
  return summarize(classifier, mixer, outcomes);
}

DcaReport dca_exhaustive(const DomainClassifier& classifier, const Mixer& mixer,
                         std::span<const LabeledImage> synthetic, std::span<const Image> real, std::uint64_t seed,
                         bool soft, WorkerPool* pool) {
  if (synthetic.empty() || real.empty()) throw Error("dca: both image sets must be non-empty");
  const std::size_t nr = real.size();
  std::vector<PairOutcome> outcomes(synthetic.size() * nr);
  for_each_index(outcomes.size(), pool, [&](std::size_t i) {
    Rng rng = Rng::split(seed, i);
    const std::size_t si = i / nr, ri = i % nr;
    outcomes[i] = evaluate_pair(classifier, mixer, synthetic[si], real[ri], real[(ri + 1) % nr], rng, soft);
  });
  return summarize(classifier, mixer, outcomes);
}

}  // namespace glyphforge
