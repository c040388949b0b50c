#pragma once

#include <cstdint>
#include <vector>

#include "glyphforge/core_types.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge {

/// Per-pixel source of a mixed sample.
enum class Provenance : std::uint8_t { Real1 = 0, Real2 = 1, Synth = 2 };

using ProvenanceMap = Raster<std::uint8_t>;

/// Real image with its teacher pseudo-label Y_u and reliability mask E_u.
struct RealTriple {
  Image image;
  BinaryMask label;
  BinaryMask reliability;
};

/// Synthetic image with its box label map Y_l. Its reliability is all-one.
struct SynthPair {
  Image image;
  BinaryMask label;
};

struct MixPair {
  Image image;
  BinaryMask label;
  BinaryMask reliability;
  ProvenanceMap provenance;

  bool operator==(const MixPair& o) const {
    return image == o.image && (label == o.label).all() && (reliability == o.reliability).all() &&
           (provenance == o.provenance).all();
  }
};

/// m * a + (1 - m) * b for a binary m; exact selection, no blending.
template <typename DA, typename DB, typename DM>
typename DA::PlainObject masked_compose(const Eigen::ArrayBase<DA>& a, const Eigen::ArrayBase<DB>& b,
                                        const Eigen::ArrayBase<DM>& m) {
  require_same_shape(a, b, "masked_compose");
  require_same_shape(a, m, "masked_compose");
  return (m.derived() != typename DM::Scalar(0)).select(a.derived(), b.derived());
}

Image masked_compose(const Image& a, const Image& b, const BinaryMask& m);

/// Promotes a 1-channel image to 3 channels; 3-channel input is returned as is.
Image to_rgb(const Image& img);

MixPair as_mix_pair(const RealTriple& real);

/// Graffiti-like inter-domain mixing: glyph pixels (m_g = 1) come from the
/// synthetic sample, everything else from `real`. Reliability on glyph
/// pixels is 1.
MixPair gim(const MixPair& real, const SynthPair& synth, const BinaryMask& m_g);
MixPair gim(const RealTriple& real, const SynthPair& synth, const BinaryMask& m_g);

struct TimParams {
  int num_candidates = 3;
  double side_fraction_min = 0.25;
  double side_fraction_max = 0.5;

  void validate() const;
};

struct TimSelection {
  BinaryMask mask;
  std::size_t chosen_index = 0;
  std::vector<PixelRect> candidates;
};

/// Random candidate rectangles, drawn in order from rng.
std::vector<PixelRect> tim_candidates(int width, int height, const TimParams& params, Rng& rng);

/// Index of the rectangle with the largest in-rectangle sum of y2; ties go
/// to the lowest index.
std::size_t tim_argmax(const BinaryMask& y2, const std::vector<PixelRect>& candidates);

TimSelection tim_select_mask(const BinaryMask& y2, const TimParams& params, Rng& rng);

/// Text-balanced intra-domain mixing under a given rectangle mask:
/// m_t pixels come from `second`, the rest from `first`.
MixPair tim_compose(const RealTriple& first, const RealTriple& second, const BinaryMask& m_t);
MixPair tim(const RealTriple& first, const RealTriple& second, const TimParams& params, Rng& rng);

/// Intra- then inter-domain mixing. With use_tim = false the second real
/// triple is ignored and only GIM is applied.
MixPair glyphmix(const RealTriple& first, const RealTriple& second, const SynthPair& synth,
                 const BinaryMask& m_g, const TimParams& params, Rng& rng, bool use_tim = true);

// Baseline mixers. `base` is the image being mixed into, `donor` the image
// contributing pixels.

/// (1 - lambda) * base + lambda * donor, rounded half up.
Image mixup(const Image& base, const Image& donor, double lambda);
Image cutmix(const Image& base, const Image& donor, const PixelRect& rect);
Image classmix(const Image& base, const Image& donor, const BinaryMask& class_mask);

/// CutMix rectangle: area ratio 1 - lambda with lambda ~ U(0, 1), uniform center, clipped.
PixelRect random_cutmix_rect(int width, int height, Rng& rng);

}  // namespace glyphforge
