#include "glyphforge/engine.hpp"

#include <chrono>

namespace glyphforge {

namespace {

class StageTimer {
 public:
  explicit StageTimer(double* sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    if (sink_)
      *sink_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double* sink_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

PreparedSynth prepare_synth(const Image& image, std::span<const QuadBox> boxes, const GlyphParams& params,
                            StageTimes* times) {
  if (!times) {
    const GlyphMaskReport report = build_glyph_mask(image, boxes, params);
    return {{image, label_map(boxes, image.width(), image.height())}, report.mask};
  }
  params.validate();
  Image gray;
  {
    StageTimer t(&times->grayscale_ms);
    gray = to_grayscale(image);
  }
  BinaryMask glyphs = BinaryMask::Zero(image.height(), image.width());
  {
    StageTimer t(&times->kmeans_ms);
    for (const auto& box : boxes) {
      const GlyphFragment f = glyph_mask_for_box(gray.plane(0), box, params);
      if (!f.skipped) f.merge_into(glyphs);
    }
  }
  PreparedSynth out;
  {
    StageTimer t(&times->rasterize_ms);
    out.pair = {image, label_map(boxes, image.width(), image.height())};
  }
  out.glyph_mask = std::move(glyphs);
  return out;
}

MixPair generate_glyphmix_pair(const PreparedSynth& synth, const RealTriple& first, const RealTriple& second,
                               const TimParams& params, bool use_tim, Rng& rng, StageTimes* times) {
  StageTimer t(times ? &times->compose_ms : nullptr);
  return glyphmix(first, second, synth.pair, synth.glyph_mask, params, rng, use_tim);
}

}  // namespace glyphforge
