#include "glyphforge/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glyphforge/toy_corpus.hpp"
#include "glyphforge/worker_pool.hpp"

namespace glyphforge {

BenchSources procedural_bench_sources(int size, std::size_t per_domain, std::uint64_t seed) {
  if (per_domain < 1) throw Error("procedural_bench_sources: need at least one image per domain");
  BenchSources src;
  for (auto& s : make_toy_corpus(Domain::Synthetic, per_domain, size, size, seed))
    src.synthetic.push_back({std::move(s.image), std::move(s.char_boxes)});
  for (auto& r : make_toy_corpus(Domain::Real, per_domain, size, size, seed + 1)) {
    const BinaryMask ones = BinaryMask::Ones(size, size);
    src.real.push_back({std::move(r.image), std::move(r.text_truth), ones});
  }
  return src;
}

MixPair bench_pair(const BenchSources& sources, std::size_t index, std::uint64_t seed, const BenchOptions& options,
                   StageTimes* times) {
  const std::size_t ns = sources.synthetic.size();
  const auto nr = static_cast<std::int64_t>(sources.real.size());
  if (ns == 0 || nr == 0) throw Error("bench: empty sources");

  // Permutation for this pass over the synthetic sources.
  Rng pass_rng = Rng::split(seed, index / ns, 0xBE);
  std::vector<std::size_t> perm(ns);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = ns; i > 1; --i)
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(pass_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

  Rng rng = Rng::split(seed, index);
  const LabeledImage& synth = sources.synthetic[perm[index % ns]];
  const RealTriple& first = sources.real[static_cast<std::size_t>(rng.uniform_int(0, nr - 1))];
  const RealTriple& second = sources.real[static_cast<std::size_t>(rng.uniform_int(0, nr - 1))];
  const PreparedSynth prepared = prepare_synth(synth.image, synth.boxes, options.glyph, times);
  return generate_glyphmix_pair(prepared, first, second, options.tim, options.use_tim, rng, times);
}

std::uint64_t digest(const MixPair& pair) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](const Raster<std::uint8_t>& r) {
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      h ^= r.data()[i];
      h *= 0x100000001b3ull;
    }
  };
  for (int c = 0; c < pair.image.channels(); ++c) feed(pair.image.plane(c));
  feed(pair.label);
  feed(pair.reliability);
  feed(pair.provenance);
  return h;
}

namespace {

StagePercentiles percentiles(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  auto rank = [&](double p) {
    const auto r = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size()) - 1e-9));
    return v[std::clamp<std::size_t>(r, 1, v.size()) - 1];
  };
  return {rank(50), rank(95)};
}

}  // namespace

BenchReport bench_generate(const BenchSources& sources, std::size_t count, unsigned workers, std::uint64_t seed,
                           const BenchOptions& options) {
  if (count < 1) throw Error("bench_generate: count must be >= 1");
  if (sources.synthetic.empty() || sources.real.empty()) throw Error("bench_generate: empty sources");
  std::vector<StageTimes> times(count);
  std::vector<double> pair_ms(count);
  std::vector<std::uint64_t> digests(count);

  WorkerPool pool(std::max(1u, workers));
  const auto start = std::chrono::steady_clock::now();
  pool.parallel_for(count, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    digests[i] = digest(bench_pair(sources, i, seed, options, &times[i]));
    pair_ms[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  BenchReport report;
  report.images = count;
  report.wall_seconds = wall;
  report.images_per_second = static_cast<double>(count) / wall;
  report.workers = pool.size();
  report.size = sources.synthetic.front().image.width();
  std::vector<double> g, k, r, c;
  report.max_stage_overrun_ms = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    g.push_back(times[i].grayscale_ms);
    k.push_back(times[i].kmeans_ms);
    r.push_back(times[i].rasterize_ms);
    c.push_back(times[i].compose_ms);
    report.max_stage_overrun_ms = std::max(report.max_stage_overrun_ms, times[i].total_ms() - pair_ms[i]);
  }
  report.grayscale = percentiles(g);
  report.kmeans = percentiles(k);
  report.rasterize = percentiles(r);
  report.compose = percentiles(c);

  report.parity_checked = std::min(count, options.parity_samples);
  report.bit_parity = true;
  for (std::size_t i = 0; i < report.parity_checked; ++i)
    if (digest(bench_pair(sources, i, seed, options)) != digests[i]) report.bit_parity = false;
  return report;
}

std::string BenchReport::to_text() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "images        " << images << " at " << size << "x" << size << " on " << workers << " workers\n";
  os << "wall          " << wall_seconds << " s\n";
  os << "throughput    " << images_per_second << " images/s\n";
  auto line = [&](const char* name, const StagePercentiles& p) {
    os << name << "p50 " << p.p50_ms << " ms  p95 " << p.p95_ms << " ms\n";
  };
  line("grayscale     ", grayscale);
  line("kmeans        ", kmeans);
  line("rasterize     ", rasterize);
  line("compose       ", compose);
  os << "bit parity    " << (bit_parity ? "ok" : "MISMATCH") << " (" << parity_checked << " pairs)\n";
  return os.str();
}

std::string BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["images"] = images;
  j["wall_seconds"] = wall_seconds;
  j["images_per_second"] = images_per_second;
  j["workers"] = workers;
  j["size"] = size;
  for (const auto& [name, p] : {std::pair{"grayscale", grayscale}, std::pair{"kmeans", kmeans},
                                std::pair{"rasterize", rasterize}, std::pair{"compose", compose}})
    j["stages"][name] = {{"p50_ms", p.p50_ms}, {"p95_ms", p.p95_ms}};
  j["bit_parity"] = bit_parity;
  j["parity_checked"] = parity_checked;
  return j.dump();
}

}  // namespace glyphforge
