#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glyphforge/engine.hpp"
#include "glyphforge/student_teacher.hpp"

namespace glyphforge {

struct StagePercentiles {
  double p50_ms = 0.0;
  double p95_ms = 0.0;
};

struct BenchReport {
  std::size_t images = 0;
  double wall_seconds = 0.0;
  double images_per_second = 0.0;
  StagePercentiles grayscale;
  StagePercentiles kmeans;
  StagePercentiles rasterize;
  StagePercentiles compose;
  unsigned workers = 1;
  int size = 0;
  std::size_t parity_checked = 0;
  bool bit_parity = false;
  /// Largest per-image excess of summed stage time over that image's wall time (<= 0 when consistent).
  double max_stage_overrun_ms = 0.0;

  std::string to_text() const;
  std::string to_json() const;
};

struct BenchSources {
  std::vector<LabeledImage> synthetic;
  std::vector<RealTriple> real;
};

/// Procedural sources at size x size. Real triples carry the scene's box
/// map as Y_u and an all-one E_u.
BenchSources procedural_bench_sources(int size, std::size_t per_domain, std::uint64_t seed);

struct BenchOptions {
  GlyphParams glyph;
  TimParams tim;
  bool use_tim = true;
  /// Pairs regenerated through the untimed path and compared bit for bit.
  std::size_t parity_samples = 16;
};

/// Pair i of a run. Synthetic sources are visited in a fresh permutation per
/// pass; real sources are drawn uniformly. With `times` the stages are timed.
MixPair bench_pair(const BenchSources& sources, std::size_t index, std::uint64_t seed, const BenchOptions& options,
                   StageTimes* times = nullptr);

/// Generates `count` pairs on `workers` threads, keeping only a digest of each.
BenchReport bench_generate(const BenchSources& sources, std::size_t count, unsigned workers, std::uint64_t seed,
                           const BenchOptions& options = {});

/// FNV-1a over every plane and mask of the pair.
std::uint64_t digest(const MixPair& pair);

}  // namespace glyphforge
