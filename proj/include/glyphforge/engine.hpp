#pragma once

#include <span>

#include "glyphforge/annotation_io.hpp"
#include "glyphforge/glyph_segmentation.hpp"
#include "glyphforge/mixing.hpp"

namespace glyphforge {

/// Wall time spent in each generation stage, in milliseconds.
struct StageTimes {
  double grayscale_ms = 0.0;
  double kmeans_ms = 0.0;
  double rasterize_ms = 0.0;
  double compose_ms = 0.0;

  double total_ms() const { return grayscale_ms + kmeans_ms + rasterize_ms + compose_ms; }
};

/// A synthetic sample ready for mixing: Y_l and its glyph mask M_G.
struct PreparedSynth {
  SynthPair pair;
  BinaryMask glyph_mask;
};

/// Builds Y_l = label_map(boxes) and M_G = build_glyph_mask(image, boxes).
/// With `times`, each stage is timed; the result is the same either way.
PreparedSynth prepare_synth(const Image& image, std::span<const QuadBox> boxes, const GlyphParams& params,
                            StageTimes* times = nullptr);

/// One GlyphMix pair from prepared synthetic data and two real triples.
MixPair generate_glyphmix_pair(const PreparedSynth& synth, const RealTriple& first, const RealTriple& second,
                               const TimParams& params, bool use_tim, Rng& rng, StageTimes* times = nullptr);

}  // namespace glyphforge
