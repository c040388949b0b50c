#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "glyphforge/core_types.hpp"

namespace glyphforge {

class WorkerPool;

struct GlyphParams {
  int kmeans_max_iters = 20;
  double kmeans_tol = 0.5;          // intensity units
  double min_intensity_range = 8;   // intensity units
  /// When the two clusters' boundary shares differ by no more than this
  /// fraction, the cluster with fewer pixels overall is taken as the glyph.
  double border_vote_margin = 0.0;

  void validate() const;
};

struct KMeansResult {
  std::vector<std::uint8_t> labels;
  std::array<double, 2> centroids{};
  int iterations = 0;
};

/// Two-cluster Lloyd's algorithm over 8-bit intensities. Centroids start at
/// the observed minimum and maximum. A value exactly between the centroids
/// counts half toward each during updates and is labelled 0 in the output.
/// The caller must ensure values is non-empty and spans at least
/// min_intensity_range.
KMeansResult kmeans2(std::span<const std::uint8_t> values, const GlyphParams& params);

/// Glyph pixels of a single box. `local` is indexed relative to `rect`,
/// which positions the fragment in full-image coordinates.
struct GlyphFragment {
  PixelRect rect;
  BinaryMask local;
  bool skipped = false;

  BinaryMask to_full(int width, int height) const;
  void merge_into(BinaryMask& mask) const;
};

/// Clusters the pixels inside `box` on grayscale and keeps the cluster that
/// occupies the smaller share of the box's 1-pixel boundary ring. Pixels
/// exactly between the centroids are never glyph. A box whose vote cannot
/// tell the clusters apart is skipped.
GlyphFragment glyph_mask_for_box(const Raster<std::uint8_t>& gray, const QuadBox& box, const GlyphParams& params);
GlyphFragment glyph_mask_for_box(const Image& img, const QuadBox& box, const GlyphParams& params);

struct GlyphMaskReport {
  BinaryMask mask;
  std::size_t boxes_processed = 0;
  std::size_t boxes_skipped_degenerate = 0;
  /// Glyph pixels over pixels covered by the union of boxes (0 when no box has area).
  double glyph_pixel_fraction = 0.0;
};

/// Union of all per-box fragments. With a pool, boxes are clustered in
/// parallel; the merged mask does not depend on the worker count.
GlyphMaskReport build_glyph_mask(const Image& img, std::span<const QuadBox> boxes, const GlyphParams& params,
                                 WorkerPool* pool = nullptr);

/// Baseline: one clustering over the whole image, with the glyph cluster
/// chosen by the same border-vote rule applied to the image border.
BinaryMask whole_image_glyph_mask(const Image& img, const GlyphParams& params);

/// Fraction of pixels inside `region` where mask equals ground truth.
double eval_glyph_mask(const BinaryMask& mask, const BinaryMask& ground_truth, const BinaryMask& region);

}  // namespace glyphforge
