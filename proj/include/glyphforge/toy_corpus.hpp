#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glyphforge/core_types.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge {

enum class Domain { Synthetic, Real };

/// Procedurally generated text scene with exact pixel ground truth.
///
/// Synthetic scenes look rendered: flat backgrounds and banners, hard-edged
/// glyphs, dense text. Real scenes have textured, noisy backgrounds,
/// clutter shapes, anti-aliased and blurred glyphs, and sparser text.
struct ToyScene {
  Image image;
  std::vector<QuadBox> char_boxes;
  std::vector<QuadBox> word_boxes;
  std::vector<std::string> transcriptions;
  BinaryMask glyph_truth;  // inked pixels
  BinaryMask text_truth;   // union of character boxes
};

ToyScene make_toy_scene(Domain domain, int width, int height, Rng& rng);

/// count scenes; scene i uses Rng::split(seed, i).
std::vector<ToyScene> make_toy_corpus(Domain domain, std::size_t count, int width, int height, std::uint64_t seed);

}  // namespace glyphforge
