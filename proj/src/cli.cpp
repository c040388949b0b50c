#include "glyphforge/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "glyphforge/bench.hpp"
#include "glyphforge/config.hpp"
#include "glyphforge/domain_eval.hpp"
#include "glyphforge/image_io.hpp"
#include "glyphforge/toy_corpus.hpp"
#include "glyphforge/version.hpp"
#include "glyphforge/worker_pool.hpp"

namespace glyphforge {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string log_level;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
  c.seed_opt = cmd->add_option("--seed", c.seed, "Random seed");
  c.workers_opt = cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--log-level", c.log_level, "trace|debug|info|warn|error|off");
}

// Config file first, flags on top.
GlobalConfig load_config(const Common& c) {
  GlobalConfig g;
  if (!c.config_path.empty()) apply_config(g, read_config_file(c.config_path));
  if (c.seed_opt && c.seed_opt->count()) g.train.seed = c.seed;
  if (c.workers_opt && c.workers_opt->count()) g.train.workers = c.workers;
  return g;
}

void setup_logging(const Common& c, const GlobalConfig& g) {
  auto logger = spdlog::get("glyphforge");
  if (!logger) logger = spdlog::stderr_color_mt("glyphforge");
  spdlog::set_default_logger(logger);
  std::string level = g.log_level;
  if (const char* env = std::getenv("GLYPHFORGE_LOG"); env && *env) level = env;
  if (!c.log_level.empty()) level = c.log_level;
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") throw UsageError("unknown log level '" + level + "'");
  spdlog::set_level(parsed);
}

std::string numbered(std::size_t i, const std::string& suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return buf + suffix;
}

// Resamples an image and its boxes to width x height.
LabeledImage resize_labeled(const LabeledImage& src, int width, int height) {
  if (src.image.width() == width && src.image.height() == height) return src;
  const double sx = static_cast<double>(width) / src.image.width();
  const double sy = static_cast<double>(height) / src.image.height();
  auto map = [&](const Point& p) { return Point{(p.x + 0.5) * sx - 0.5, (p.y + 0.5) * sy - 0.5}; };
  LabeledImage out{resize_image(src.image, width, height), {}};
  for (const auto& b : src.boxes) out.boxes.push_back({map(b.lt), map(b.lb), map(b.rt), map(b.rb)});
  return out;
}

struct SyntheticSet {
  std::vector<LabeledImage> items;
  std::vector<std::string> paths;
  ParsedAnnotations parsed;
};

// Loads every record at the given granularity, resized to the first image's size.
SyntheticSet load_synthetic(const fs::path& annotations, Granularity g) {
  SyntheticSet set;
  set.parsed = parse_annotations(annotations);
  if (set.parsed.records.empty()) throw Error("no usable records in '" + annotations.string() + "'");
  for (const auto& rec : set.parsed.records) {
    const fs::path path = resolve_image_path(annotations, rec.image_path);
    LabeledImage item{to_rgb(read_image(path)), select_boxes(rec, g)};
    if (!set.items.empty())
      item = resize_labeled(item, set.items.front().image.width(), set.items.front().image.height());
    set.items.push_back(std::move(item));
    set.paths.push_back(path.string());
  }
  if (set.parsed.dropped_boxes || set.parsed.dropped_records)
    spdlog::warn("{}: dropped {} invalid boxes and {} empty records", annotations.string(), set.parsed.dropped_boxes,
                 set.parsed.dropped_records);
  return set;
}

struct RealSet {
  std::vector<Image> images;
  std::vector<std::string> paths;
};

RealSet load_real(const fs::path& dir, int width, int height) {
  RealSet set;
  for (const auto& p : list_images(dir)) {
    set.images.push_back(resize_image(to_rgb(read_image(p)), width, height));
    set.paths.push_back(p.string());
  }
  if (set.images.empty()) throw Error("no images in '" + dir.string() + "'");
  return set;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string key_values_text(const GlobalConfig& g) {
  std::ostringstream os;
  for (const auto& [k, v] : to_key_values(g)) os << k << " = \"" << v << "\"\n";
  return os.str();
}

// ---- extract-glyphs ----

struct ExtractArgs {
  std::string annotations;
  std::string out_dir;
  std::string granularity = "char";
};

void run_extract(const ExtractArgs& a, const GlobalConfig& g) {
  const Granularity gran = parse_granularity(a.granularity);
  const ParsedAnnotations parsed = parse_annotations(a.annotations);
  fs::create_directories(a.out_dir);
  WorkerPool pool(g.train.workers);
  json records = json::array();
  std::size_t processed = 0, skipped = 0;
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    const auto& rec = parsed.records[i];
    const Image img = read_image(resolve_image_path(a.annotations, rec.image_path));
    const GlyphMaskReport report = build_glyph_mask(img, select_boxes(rec, gran), g.train.glyph, &pool);
    const std::string name = numbered(i, "_glyph.png");
    write_mask_png(fs::path(a.out_dir) / name, report.mask);
    processed += report.boxes_processed;
    skipped += report.boxes_skipped_degenerate;
    records.push_back({{"index", i},
                       {"image_path", rec.image_path},
                       {"mask", name},
                       {"boxes_processed", report.boxes_processed},
                       {"boxes_skipped_degenerate", report.boxes_skipped_degenerate},
                       {"glyph_pixel_fraction", report.glyph_pixel_fraction}});
    spdlog::debug("{}: {} boxes, glyph fraction {:.3f}", rec.image_path, report.boxes_processed,
                  report.glyph_pixel_fraction);
  }
  json out;
  out["annotations"] = a.annotations;
  out["granularity"] = to_string(gran);
  out["seed"] = g.train.seed;
  out["records"] = parsed.records.size();
  out["dropped_boxes"] = parsed.dropped_boxes;
  out["dropped_records"] = parsed.dropped_records;
  out["boxes_processed"] = processed;
  out["boxes_skipped_degenerate"] = skipped;
  out["masks"] = records;
  write_text(fs::path(a.out_dir) / "report.json", out.dump(2) + "\n");
  spdlog::info("wrote {} glyph masks to {}", parsed.records.size(), a.out_dir);
}

// ---- mix ----

struct MixArgs {
  std::string synthetic;
  std::string real;
  std::string out_dir;
  std::string mode = "glyphmix";
  std::size_t count = 1;
  std::string checkpoint;
  std::string granularity = "char";
  bool no_tim = false;
  double gamma = -1.0;  // < 0: gamma.start from the config
};

std::map<std::size_t, json> read_manifest(const fs::path& path) {
  std::map<std::size_t, json> done;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      const auto index = j.at("index").get<std::size_t>();
      done[index] = std::move(j);
    } catch (const json::exception& e) {
      spdlog::warn("{}: ignoring unreadable manifest line: {}", path.string(), e.what());
    }
  }
  return done;
}

void run_mix(const MixArgs& a, const GlobalConfig& g) {
  static const std::set<std::string> modes{"glyphmix", "mixup", "cutmix", "classmix"};
  if (!modes.count(a.mode)) throw UsageError("unknown mix mode '" + a.mode + "'");
  const Granularity gran = parse_granularity(a.granularity);
  const SyntheticSet synth = load_synthetic(a.synthetic, gran);
  const int w = synth.items.front().image.width();
  const int h = synth.items.front().image.height();
  const RealSet real = load_real(a.real, w, h);
  const double gamma = a.gamma >= 0.0 ? a.gamma : g.train.gamma_start;
  const bool use_tim = g.train.use_tim && !a.no_tim;
  std::optional<PixelScorer> teacher;
  if (!a.checkpoint.empty()) teacher = load_checkpoint(a.checkpoint).teacher;

  const fs::path out(a.out_dir);
  fs::create_directories(out / "pairs");
  const fs::path manifest_path = out / "manifest.jsonl";
  const auto done = read_manifest(manifest_path);
  for (const auto& [idx, rec] : done)
    if (rec.value("seed", g.train.seed) != g.train.seed || rec.value("mode", a.mode) != a.mode)
      throw UsageError("manifest '" + manifest_path.string() + "' was written with a different seed or mode");
  {
    // A crash can leave a line without its newline; terminate it before appending.
    std::ifstream check(manifest_path, std::ios::binary | std::ios::ate);
    if (check && check.tellg() > 0) {
      check.seekg(-1, std::ios::end);
      if (check.get() != '\n') std::ofstream(manifest_path, std::ios::app) << '\n';
    }
  }
  std::ofstream manifest(manifest_path, std::ios::app);
  if (!manifest) throw IoError("cannot open '" + manifest_path.string() + "' for appending");

  auto triple = [&](const Image& img) {
    if (!teacher) return RealTriple{img, BinaryMask::Zero(h, w), BinaryMask::Zero(h, w)};
    const PseudoLabel pl = pseudo_label(*teacher, img, g.train.binarize_threshold);
    return RealTriple{img, pl.label, reliability_mask(pl.logits, gamma, g.train.entropy_form)};
  };

  const auto ns = static_cast<std::int64_t>(synth.items.size());
  const auto nr = static_cast<std::int64_t>(real.images.size());
  std::size_t written = 0;
  for (std::size_t i = 0; i < a.count; ++i) {
    if (done.count(i)) continue;
    Rng rng = Rng::split(g.train.seed, i);
    const auto si = static_cast<std::size_t>(rng.uniform_int(0, ns - 1));
    const auto r1 = static_cast<std::size_t>(rng.uniform_int(0, nr - 1));
    const auto r2 = static_cast<std::size_t>(rng.uniform_int(0, nr - 1));
    const LabeledImage& s = synth.items[si];
    const SynthPair sp{s.image, label_map(s.boxes, w, h)};
    const RealTriple first = triple(real.images[r1]);
    MixPair pair;
    json extra;
    if (a.mode == "glyphmix") {
      const BinaryMask m_g = build_glyph_mask(s.image, s.boxes, g.train.glyph).mask;
      pair = glyphmix(first, triple(real.images[r2]), sp, m_g, g.train.tim, rng, use_tim);
    } else if (a.mode == "cutmix") {
      const PixelRect r = random_cutmix_rect(w, h, rng);
      pair = gim(first, sp, rect_mask(r, w, h));
      extra["rect"] = {r.x0, r.y0, r.x1, r.y1};
    } else if (a.mode == "classmix") {
      pair = gim(first, sp, sp.label);
    } else {
      // Mixup blends images; labels come from whichever source dominates.
      const double lambda = rng.uniform();
      pair = lambda >= 0.5 ? gim(first, sp, BinaryMask::Ones(h, w)) : as_mix_pair(first);
      pair.image = mixup(first.image, s.image, lambda);
      extra["lambda"] = lambda;
    }
    const std::string stem = numbered(i, "");
    const fs::path dir = out / "pairs";
    write_png(dir / (stem + "_image.png"), pair.image);
    write_mask_png(dir / (stem + "_label.png"), pair.label);
    write_mask_png(dir / (stem + "_reliability.png"), pair.reliability);
    write_code_png(dir / (stem + "_provenance.png"), pair.provenance);

    json rec;
    rec["index"] = i;
    rec["image"] = "pairs/" + stem + "_image.png";
    rec["label"] = "pairs/" + stem + "_label.png";
    rec["reliability"] = "pairs/" + stem + "_reliability.png";
    rec["provenance"] = "pairs/" + stem + "_provenance.png";
    rec["synthetic"] = synth.paths[si];
    rec["real"] = a.mode == "glyphmix" ? json{real.paths[r1], real.paths[r2]} : json{real.paths[r1]};
    rec["mode"] = a.mode;
    rec["seed"] = g.train.seed;
    rec["granularity"] = to_string(gran);
    rec["tim"] = a.mode == "glyphmix" && use_tim;
    rec["teacher"] = teacher.has_value();
    rec["gamma"] = gamma;
    if (!extra.empty()) rec["params"] = extra;
    manifest << rec.dump() << '\n' << std::flush;
    if (!manifest) throw IoError("failed appending to '" + manifest_path.string() + "'");
    ++written;
  }
  spdlog::info("wrote {} pairs ({} already present) to {}", written, done.size(), a.out_dir);
}

// ---- pretrain ----

struct PretrainArgs {
  std::string synthetic;
  std::string real;
  std::string out_dir;
  std::optional<std::size_t> steps;
  std::string mode;
};

void run_pretrain(const PretrainArgs& a, GlobalConfig g) {
  if (a.steps) g.train.total_steps = *a.steps;
  if (!a.mode.empty()) g.train.mode = parse_train_mode(a.mode);
  g.train.validate();
  SyntheticSet synth = load_synthetic(a.synthetic, g.train.granularity);
  TrainData data;
  data.synthetic = std::move(synth.items);
  const int w = data.synthetic.front().image.width();
  const int h = data.synthetic.front().image.height();
  if (g.train.mode == TrainMode::GlyphMix) data.real = load_real(a.real, w, h).images;
  fs::create_directories(a.out_dir);
  g.out_dir = a.out_dir;
  write_text(fs::path(a.out_dir) / "config.toml", key_values_text(g));
  spdlog::info("pretraining {} steps on {} synthetic and {} real images", g.train.total_steps, data.synthetic.size(),
               data.real.size());
  const TrainResult result = run_pretraining(g.train, data, fs::path(a.out_dir));
  if (!result.metrics.empty())
    spdlog::info("final loss {:.5f}, kept fraction {:.3f}", result.metrics.back().loss,
                 result.metrics.back().kept_fraction);
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string checkpoint;
  std::string images;
  std::string truth;
  double threshold = 0.5;
};

void run_evaluate(const EvaluateArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  std::vector<Image> images;
  std::vector<BinaryMask> truths;
  for (const auto& p : list_images(a.images)) {
    images.push_back(to_rgb(read_image(p)));
    truths.push_back(read_mask_png(fs::path(a.truth) / p.filename().replace_extension(".png")));
  }
  if (images.empty()) throw Error("no images in '" + a.images + "'");
  json out;
  for (const auto& [name, model] : {std::pair{"teacher", &ck.teacher}, std::pair{"student", &ck.student}}) {
    const PixelScore s = pixel_f_measure(*model, images, truths, a.threshold);
    std::printf("%-8s precision %.4f  recall %.4f  f-measure %.4f\n", name, s.precision, s.recall, s.f_measure);
    out[name] = {{"precision", s.precision}, {"recall", s.recall}, {"f_measure", s.f_measure}};
  }
  std::printf("%s\n", out.dump().c_str());
}

// ---- eval-dca ----

struct DcaArgs {
  std::string synthetic;
  std::string real;
  std::string mixers = "glyphmix,mixup,cutmix,classmix";
  std::size_t budget = 1000;
  bool soft = false;
  bool exhaustive = false;
  std::string out_dir;
};

void run_dca(const DcaArgs& a, const GlobalConfig& g) {
  const SyntheticSet synth = load_synthetic(a.synthetic, g.train.granularity);
  const int w = synth.items.front().image.width();
  const int h = synth.items.front().image.height();
  const RealSet real = load_real(a.real, w, h);
  std::vector<Mixer> mixers;
  std::stringstream names(a.mixers);
  for (std::string name; std::getline(names, name, ',');)
    if (!name.empty()) {
      try {
        mixers.push_back(make_mixer(name, g.train.glyph, g.train.tim));
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
  if (mixers.empty()) throw UsageError("no mixers given");

  WorkerPool pool(g.train.workers);
  std::vector<Image> synth_images;
  for (const auto& s : synth.items) synth_images.push_back(s.image);
  Rng rng(g.train.seed);
  const DomainClassifier clf = train_domain_classifier(synth_images, real.images, rng, {}, &pool);

  json reports = json::array();
  std::printf("%-10s %8s %8s %8s %9s\n", "mixer", "pairs", "skipped", "dca", "holdout");
  for (const auto& m : mixers) {
    const DcaReport r = a.exhaustive
                            ? dca_exhaustive(clf, m, synth.items, real.images, g.train.seed, a.soft, &pool)
                            : dca(clf, m, synth.items, real.images, g.train.seed, {a.budget, a.soft}, &pool);
    std::printf("%-10s %8zu %8zu %8.4f %9.4f\n", r.mixer.c_str(), r.pairs_evaluated, r.pairs_skipped, r.dca,
                r.holdout_accuracy);
    reports.push_back({{"mixer", r.mixer},
                       {"pairs_evaluated", r.pairs_evaluated},
                       {"pairs_skipped", r.pairs_skipped},
                       {"dca", r.dca},
                       {"holdout_accuracy", r.holdout_accuracy}});
  }
  std::printf("%s\n", reports.dump().c_str());
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    write_text(fs::path(a.out_dir) / "dca.json", reports.dump(2) + "\n");
  }
}

// ---- bench ----

struct BenchArgs {
  std::size_t count = 1000;
  int size = 640;
  std::size_t sources = 8;
  std::string synthetic;
  std::string real;
  std::string out_dir;
};

void run_bench(const BenchArgs& a, const GlobalConfig& g) {
  BenchSources sources;
  if (!a.synthetic.empty() || !a.real.empty()) {
    if (a.synthetic.empty() || a.real.empty()) throw UsageError("--synthetic and --real must be given together");
    for (auto& s : load_synthetic(a.synthetic, g.train.granularity).items)
      sources.synthetic.push_back(resize_labeled(s, a.size, a.size));
    for (auto& img : load_real(a.real, a.size, a.size).images) {
      const BinaryMask zero = BinaryMask::Zero(a.size, a.size);
      sources.real.push_back({std::move(img), zero, BinaryMask::Ones(a.size, a.size)});
    }
  } else {
    sources = procedural_bench_sources(a.size, a.sources, g.train.seed);
  }
  BenchOptions options;
  options.glyph = g.train.glyph;
  options.tim = g.train.tim;
  options.use_tim = g.train.use_tim;
  const BenchReport r = bench_generate(sources, a.count, g.train.workers, g.train.seed, options);
  std::printf("%s%s\n", r.to_text().c_str(), r.to_json().c_str());
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    write_text(fs::path(a.out_dir) / "bench.json", r.to_json() + "\n");
  }
  if (!r.bit_parity) throw Error("bench: timed outputs differ from untimed generation");
}

// ---- toy-corpus ----

struct ToyArgs {
  std::string domain = "synthetic";
  std::size_t count = 16;
  int size = 96;
  std::string out_dir;
};

void run_toy(const ToyArgs& a, const GlobalConfig& g) {
  Domain domain;
  if (a.domain == "synthetic")
    domain = Domain::Synthetic;
  else if (a.domain == "real")
    domain = Domain::Real;
  else
    throw UsageError("unknown domain '" + a.domain + "' (expected synthetic or real)");
  const fs::path out(a.out_dir);
  for (const char* sub : {"images", "glyph_truth", "text_truth"}) fs::create_directories(out / sub);
  std::vector<AnnotationSet> records;
  const auto scenes = make_toy_corpus(domain, a.count, a.size, a.size, g.train.seed);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    const std::string name = numbered(i, ".png");
    write_png(out / "images" / name, s.image);
    write_mask_png(out / "glyph_truth" / name, s.glyph_truth);
    write_mask_png(out / "text_truth" / name, s.text_truth);
    records.push_back({"images/" + name, s.char_boxes, s.word_boxes, s.transcriptions});
  }
  if (domain == Domain::Synthetic) write_annotations(out / "annotations.jsonl", records);
  spdlog::info("wrote {} {} scenes to {}", scenes.size(), a.domain, a.out_dir);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"glyphforge: glyph-mixing data engine and toy student-teacher harness"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::map<CLI::App*, Common> commons;  // node-based: references stay valid
  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract-glyphs", "Write per-image glyph masks for an annotation file");
  add_common(c_extract, commons[c_extract]);
  c_extract->add_option("--annotations", extract.annotations, "Annotation JSONL")->required();
  c_extract->add_option("--out-dir", extract.out_dir, "Output directory")->required();
  c_extract->add_option("--granularity", extract.granularity, "char|word");

  MixArgs mix;
  auto* c_mix = app.add_subcommand("mix", "Generate mixed training pairs");
  add_common(c_mix, commons[c_mix]);
  c_mix->add_option("--synthetic", mix.synthetic, "Synthetic annotation JSONL")->required();
  c_mix->add_option("--real", mix.real, "Directory of real images")->required();
  c_mix->add_option("--out", mix.out_dir, "Output directory")->required();
  c_mix->add_option("--mode", mix.mode, "glyphmix|mixup|cutmix|classmix");
  c_mix->add_option("--count", mix.count, "Number of pairs")->check(CLI::PositiveNumber);
  c_mix->add_option("--checkpoint", mix.checkpoint, "Teacher checkpoint for pseudo-labels");
  c_mix->add_option("--granularity", mix.granularity, "char|word");
  c_mix->add_flag("--no-tim", mix.no_tim, "Disable intra-domain mixing");
  c_mix->add_option("--gamma", mix.gamma, "Entropy percentile for the reliability mask")->check(CLI::Range(0.0, 100.0));

  PretrainArgs pre;
  auto* c_pre = app.add_subcommand("pretrain", "Run student-teacher pre-training");
  add_common(c_pre, commons[c_pre]);
  c_pre->add_option("--synthetic", pre.synthetic, "Synthetic annotation JSONL")->required();
  c_pre->add_option("--real", pre.real, "Directory of real images")->required();
  c_pre->add_option("--out", pre.out_dir, "Run directory")->required();
  c_pre->add_option("--steps", pre.steps, "Override train.total_steps");
  c_pre->add_option("--mode", pre.mode, "glyphmix|synthetic_only");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Pixel F-measure of a checkpoint against ground-truth masks");
  add_common(c_ev, commons[c_ev]);
  c_ev->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  c_ev->add_option("--images", ev.images, "Directory of images")->required();
  c_ev->add_option("--truth", ev.truth, "Directory of 0/255 masks named like the images")->required();
  c_ev->add_option("--threshold", ev.threshold, "Score threshold")->check(CLI::Range(0.0, 1.0));

  DcaArgs dca_args;
  auto* c_dca = app.add_subcommand("eval-dca", "Domain classification accuracy of mixers");
  add_common(c_dca, commons[c_dca]);
  c_dca->add_option("--synthetic", dca_args.synthetic, "Synthetic annotation JSONL")->required();
  c_dca->add_option("--real", dca_args.real, "Directory of real images")->required();
  c_dca->add_option("--mixers", dca_args.mixers, "Comma-separated mixer names");
  c_dca->add_option("--budget", dca_args.budget, "Sampled pairs per mixer")->check(CLI::PositiveNumber);
  c_dca->add_flag("--soft", dca_args.soft, "Average P(real) instead of thresholding");
  c_dca->add_flag("--exhaustive", dca_args.exhaustive, "Evaluate every pair");
  c_dca->add_option("--out", dca_args.out_dir, "Directory for dca.json");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Measure mixed-pair generation throughput");
  add_common(c_bench, commons[c_bench]);
  c_bench->add_option("--count", bench.count, "Pairs to generate")->check(CLI::PositiveNumber);
  c_bench->add_option("--size", bench.size, "Image side length")->check(CLI::Range(16, 8192));
  c_bench->add_option("--sources", bench.sources, "Procedural images per domain")->check(CLI::PositiveNumber);
  c_bench->add_option("--synthetic", bench.synthetic, "Synthetic annotation JSONL instead of procedural sources");
  c_bench->add_option("--real", bench.real, "Real image directory instead of procedural sources");
  c_bench->add_option("--out", bench.out_dir, "Directory for bench.json");

  ToyArgs toy;
  auto* c_toy = app.add_subcommand("toy-corpus", "Write a procedural toy corpus");
  add_common(c_toy, commons[c_toy]);
  c_toy->add_option("--domain", toy.domain, "synthetic|real");
  c_toy->add_option("--count", toy.count, "Number of scenes")->check(CLI::PositiveNumber);
  c_toy->add_option("--size", toy.size, "Image side length")->check(CLI::Range(16, 4096));
  c_toy->add_option("--out", toy.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Common& common = commons.at(chosen);
  try {
    const GlobalConfig g = load_config(common);
    setup_logging(common, g);
    if (c_extract->parsed())
      run_extract(extract, g);
    else if (c_mix->parsed())
      run_mix(mix, g);
    else if (c_pre->parsed())
      run_pretrain(pre, g);
    else if (c_ev->parsed())
      run_evaluate(ev);
    else if (c_dca->parsed())
      run_dca(dca_args, g);
    else if (c_bench->parsed())
      run_bench(bench, g);
    else if (c_toy->parsed())
      run_toy(toy, g);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace glyphforge
