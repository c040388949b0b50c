#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "glyphforge/annotation_io.hpp"
#include "glyphforge/augment.hpp"
#include "glyphforge/image_io.hpp"
#include "glyphforge/student_teacher.hpp"
#include "glyphforge/toy_corpus.hpp"
#include "glyphforge/worker_pool.hpp"
#include "oracles.hpp"

using namespace glyphforge;
namespace fs = std::filesystem;

namespace {

TrainData small_data(int size, std::size_t n, std::uint64_t seed) {
  TrainData d;
  for (auto& s : make_toy_corpus(Domain::Synthetic, n, size, size, seed)) d.synthetic.push_back({s.image, s.char_boxes});
  for (auto& s : make_toy_corpus(Domain::Real, n, size, size, seed + 1)) d.real.push_back(s.image);
  return d;
}

TrainConfig small_config(std::size_t steps) {
  TrainConfig c;
  c.total_steps = steps;
  c.batch_size = 4;
  c.seed = 17;
  return c;
}

std::uint64_t weight_hash(const PixelScorer& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
    std::uint64_t bits;
    const double v = m.weights(i);
    std::memcpy(&bits, &v, sizeof bits);
    h = (h ^ bits) * 1099511628211ull;
  }
  return h;
}

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("learning rate schedule closed form") {
  TrainConfig c;
  c.total_steps = 2000;
  c.lr_floor = 1e-5;
  const double base = c.base_lr();
  CHECK(base == doctest::Approx(0.003 * 24 / 256));
  const std::size_t warm = c.warmup_steps();
  CHECK(warm == 200);
  CHECK(lr_at(c, 0) == doctest::Approx(base / 200));
  CHECK(lr_at(c, warm - 1) == base);
  CHECK(lr_at(c, 1999) == doctest::Approx(1e-5).epsilon(1e-12));
  const double mid = c.lr_floor + (base - c.lr_floor) * 0.5 * (1 + std::cos(std::numbers::pi * 0.5));
  CHECK(lr_at(c, warm - 1 + (2000 - warm) / 2) == doctest::Approx(mid));
  for (std::size_t t = warm; t < 2000; ++t) REQUIRE(lr_at(c, t) <= lr_at(c, t - 1));
  CHECK_THROWS_AS(lr_at(c, 2000), Error);

  c.total_steps = 1;
  CHECK(lr_at(c, 0) == base);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.batch_size = 5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.ema_alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(parse_train_mode("synthetic_only") == TrainMode::SyntheticOnly);
  CHECK(parse_optimizer("sgd") == OptimizerKind::Sgd);
}

TEST_CASE("augmenting then rasterizing equals rasterizing then augmenting") {
  Rng rng(71);
  for (int i = 0; i < 100; ++i) {
    const int w = static_cast<int>(rng.uniform_int(12, 48)), h = static_cast<int>(rng.uniform_int(12, 48));
    std::vector<QuadBox> boxes;
    for (int k = 0; k < 4; ++k) {
      const int x0 = static_cast<int>(rng.uniform_int(0, w - 3)), y0 = static_cast<int>(rng.uniform_int(0, h - 3));
      const int x1 = static_cast<int>(rng.uniform_int(x0, w - 1)), y1 = static_cast<int>(rng.uniform_int(y0, h - 1));
      boxes.push_back(QuadBox::from_rect(x0 - 0.5, y0 - 0.5, x1 + 0.5, y1 + 0.5));
    }
    const GeometricTransform t = sample_geometric(AugmentationSpec{}, rng);
    std::vector<QuadBox> warped;
    for (const auto& b : boxes) warped.push_back(warp_box(b, t, w, h));
    CHECK((warp_mask(label_map(boxes, w, h), t) == label_map(warped, w, h)).all());
  }
}

TEST_CASE("initial model carries the label prior") {
  const TrainData data = small_data(32, 4, 3);
  const GlyphCache cache = build_glyph_cache(data, GlyphParams{});
  double frac = 0;
  for (const auto& l : cache.labels) frac += static_cast<double>(popcount(l)) / static_cast<double>(l.size());
  frac /= static_cast<double>(cache.labels.size());

  TrainConfig c = small_config(1);
  const PixelScorer m = initial_model(c, cache);
  CHECK(m.weights.head(kFeatureCount).isZero());
  CHECK(m.weights(kFeatureCount) == doctest::Approx(std::log(frac / (1 - frac))));
  c.prior_init = false;
  CHECK(initial_model(c, cache) == PixelScorer::zeros());
}

TEST_CASE("pretrain_step touches the teacher only through the EMA") {
  const TrainData data = small_data(32, 6, 5);
  const TrainConfig c = small_config(10);
  const GlyphCache cache = build_glyph_cache(data, c.glyph);
  TrainState state;
  state.student = state.teacher = initial_model(c, cache);
  for (std::size_t step = 0; step < 5; ++step) {
    const StepBatch batch = assemble_batch(c, data, cache, step);
    const PixelScorer before = state.teacher;
    const std::uint64_t h = weight_hash(before);
    pretrain_step(state, batch, c);
    CHECK(weight_hash(before) == h);
    CHECK(state.teacher == ema_update(before, state.student, c.ema_alpha));
    CHECK(state.step == step + 1);
  }
}

TEST_CASE("confident teacher keeps at least the scheduled fraction") {
  const TrainData data = small_data(32, 4, 7);
  const TrainConfig c = small_config(10);
  const GlyphCache cache = build_glyph_cache(data, c.glyph);
  for (std::size_t step : {0u, 4u, 9u}) {
    TrainState state;
    state.teacher.weights(kFeatureCount) = 50.0;
    const StepMetrics m = pretrain_step(state, assemble_batch(c, data, cache, step), c);
    CHECK(m.kept_fraction >= (100.0 - m.gamma) / 100.0);
    CHECK(m.gamma == gamma_at(c.gamma_schedule(), step));
  }
}

TEST_CASE("runs are deterministic and independent of the worker count") {
  const TrainData data = small_data(32, 6, 9);
  TrainConfig c = small_config(12);
  const TrainResult a = run_pretraining(c, data);
  const TrainResult b = run_pretraining(c, data);
  c.workers = 3;
  c.prefetch = 4;
  const TrainResult p = run_pretraining(c, data);
  REQUIRE(a.metrics.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(to_json_line(a.metrics[i]) == to_json_line(b.metrics[i]));
    CHECK(to_json_line(a.metrics[i]) == to_json_line(p.metrics[i]));
  }
  CHECK(a.state.teacher == p.state.teacher);
  CHECK(a.state.student == p.state.student);

  c.seed = 18;
  CHECK_FALSE(run_pretraining(c, data).state.student == a.state.student);
}

TEST_CASE("zero steps leave the initialization in the checkpoint") {
  const TrainData data = small_data(32, 4, 11);
  const TrainConfig c = small_config(0);
  const fs::path dir = scratch("glyphforge_t0");
  const TrainResult r = run_pretraining(c, data, dir);
  CHECK(r.metrics.empty());
  const PixelScorer init = initial_model(c, build_glyph_cache(data, c.glyph));
  const Checkpoint ck = load_checkpoint(dir / "checkpoint.bin");
  CHECK(ck.step == 0);
  CHECK(ck.student == init);
  CHECK(ck.teacher == init);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint round trip") {
  const fs::path dir = scratch("glyphforge_ck");
  Rng rng(73);
  TrainState s;
  for (Eigen::Index i = 0; i <= kFeatureCount; ++i) {
    s.student.weights(i) = rng.normal();
    s.teacher.weights(i) = rng.normal();
  }
  s.step = 1234;
  TrainConfig c;
  c.seed = 99;
  save_checkpoint(dir / "a.bin", s, c);
  const Checkpoint ck = load_checkpoint(dir / "a.bin");
  CHECK(ck.student == s.student);
  CHECK(ck.teacher == s.teacher);
  CHECK(ck.step == 1234);
  CHECK(ck.seed == 99);
  CHECK(ck.config_json.find("total_steps") != std::string::npos);

  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "NOPE1234";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.bin"), IoError);
  {
    std::ifstream in(dir / "a.bin", std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), {});
    std::ofstream cut(dir / "cut.bin", std::ios::binary);
    cut << blob.substr(0, blob.size() - 8);
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "cut.bin"), IoError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("metrics file matches the in-memory log") {
  const TrainData data = small_data(32, 4, 13);
  const fs::path dir = scratch("glyphforge_metrics");
  const TrainResult r = run_pretraining(small_config(6), data, dir);
  std::ifstream in(dir / "metrics.jsonl");
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    REQUIRE(i < r.metrics.size());
    CHECK(line == to_json_line(r.metrics[i++]));
  }
  CHECK(i == 6);
  fs::remove_all(dir);
}

TEST_CASE("training loss falls on the toy corpus") {
  const TrainData data = small_data(48, 16, 15);
  TrainConfig c = small_config(500);
  c.batch_size = 8;
  const TrainResult r = run_pretraining(c, data);
  auto window = [&](std::size_t from) {
    double s = 0;
    for (std::size_t i = from; i < from + 50; ++i) s += r.metrics[i].loss;
    return s / 50;
  };
  CHECK(window(450) < window(0));
}

TEST_CASE("pixel F-measure pools counts") {
  PixelScorer all_on;
  all_on.weights(kFeatureCount) = 20.0;
  const std::vector<Image> imgs{Image(4, 4, 3, 10), Image(4, 4, 3, 200)};
  BinaryMask t0 = BinaryMask::Zero(4, 4), t1 = BinaryMask::Zero(4, 4);
  t0.block(0, 0, 2, 2).setOnes();
  t1.block(0, 0, 4, 2).setOnes();
  const std::vector<BinaryMask> truths{t0, t1};
  const PixelScore s = pixel_f_measure(all_on, imgs, truths);
  CHECK(s.precision == doctest::Approx(12.0 / 32.0));
  CHECK(s.recall == 1.0);
  CHECK(s.f_measure == doctest::Approx(2 * (12.0 / 32.0) / (1 + 12.0 / 32.0)));
}
