#include <doctest.h>

#include "glyphforge/annotation_io.hpp"
#include "glyphforge/engine.hpp"
#include "glyphforge/mixing.hpp"
#include "oracles.hpp"

using namespace glyphforge;

namespace {

SynthPair random_synth(Rng& rng, int w, int h) {
  return {oracle::random_image(rng, w, h, 3), oracle::random_mask(rng, w, h, 0.4)};
}

}  // namespace

TEST_CASE("masked_compose identities and checkerboard") {
  Rng rng(41);
  const Image a = oracle::random_image(rng, 9, 7, 3);
  const Image b = oracle::random_image(rng, 9, 7, 3);
  CHECK(masked_compose(a, b, BinaryMask::Zero(7, 9)) == b);
  CHECK(masked_compose(a, b, BinaryMask::Ones(7, 9)) == a);

  BinaryMask checker(7, 9);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) checker(y, x) = (x + y) % 2;
  const Image out = masked_compose(a, b, checker);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x)
      for (int c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == ((x + y) % 2 ? a : b).at(x, y, c));

  CHECK_THROWS_AS(masked_compose(a, b, BinaryMask::Zero(6, 9)), DimensionMismatch);
  CHECK_THROWS_AS(masked_compose(a, oracle::random_image(rng, 9, 7, 1), checker), DimensionMismatch);
}

TEST_CASE("gim examples") {
  Rng rng(42);
  const RealTriple real = oracle::random_triple(rng, 12, 10);
  const SynthPair synth = random_synth(rng, 12, 10);

  const MixPair none = gim(real, synth, BinaryMask::Zero(10, 12));
  CHECK(none == as_mix_pair(real));

  const BinaryMask m_g = oracle::random_mask(rng, 12, 10, 0.3);
  const MixPair out = gim(real, synth, m_g);
  CHECK(out == oracle::gim(real, synth, m_g));
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x) {
      const bool g = m_g(y, x) != 0;
      CHECK(out.label(y, x) == (g ? synth.label(y, x) : real.label(y, x)));
      CHECK(out.reliability(y, x) == (g ? 1 : real.reliability(y, x)));
      CHECK(out.provenance(y, x) == static_cast<std::uint8_t>(g ? Provenance::Synth : Provenance::Real1));
    }
}

TEST_CASE("tim argmax examples") {
  const std::vector<PixelRect> cands{{0, 0, 4, 4}, {4, 4, 8, 8}, {2, 2, 6, 6}};
  CHECK(tim_argmax(BinaryMask::Zero(8, 8), cands) == 0);

  BinaryMask blob = BinaryMask::Zero(8, 8);
  blob.block(5, 5, 2, 2).setOnes();
  CHECK(tim_argmax(blob, cands) == 1);

  const std::vector<PixelRect> equal{{0, 0, 2, 2}, {6, 6, 8, 8}};
  BinaryMask both = BinaryMask::Zero(8, 8);
  both(0, 0) = both(7, 7) = 1;
  CHECK(tim_argmax(both, equal) == 0);
}

TEST_CASE("tim selection matches the exhaustive-sum oracle") {
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    const int w = static_cast<int>(rng.uniform_int(8, 64)), h = static_cast<int>(rng.uniform_int(8, 64));
    const BinaryMask y2 = oracle::random_mask(rng, w, h, rng.uniform(0.0, 0.3));
    TimParams p;
    p.num_candidates = static_cast<int>(rng.uniform_int(1, 6));
    Rng a = Rng::split(43, static_cast<std::uint64_t>(i)), b = a;
    const auto sel = tim_select_mask(y2, p, a);
    const auto cands = tim_candidates(w, h, p, b);
    REQUIRE(cands == sel.candidates);
    for (const auto& r : cands) {
      CHECK(r.x0 >= 0);
      CHECK(r.y0 >= 0);
      CHECK(r.x1 <= w);
      CHECK(r.y1 <= h);
      CHECK_FALSE(r.empty());
    }
    CHECK(sel.chosen_index == oracle::argmax_rect(y2, cands));
    CHECK((sel.mask == oracle::rect(cands[sel.chosen_index], w, h)).all());
  }
}

TEST_CASE("tim examples") {
  Rng rng(44);
  const RealTriple first = oracle::random_triple(rng, 16, 12);
  const RealTriple second = oracle::random_triple(rng, 16, 12);

  Rng r1(1);
  const MixPair same = tim(first, first, TimParams{}, r1);
  CHECK(same.image == first.image);
  CHECK((same.label == first.label).all());
  CHECK((same.reliability == first.reliability).all());

  CHECK(tim_compose(first, second, BinaryMask::Zero(12, 16)) == as_mix_pair(first));

  const BinaryMask m_t = oracle::rect({3, 2, 11, 9}, 16, 12);
  CHECK(tim_compose(first, second, m_t) == oracle::tim(first, second, m_t));
}

TEST_CASE("glyphmix equals tim then gim") {
  Rng rng(45);
  const RealTriple first = oracle::random_triple(rng, 20, 14);
  const RealTriple second = oracle::random_triple(rng, 20, 14);
  const SynthPair synth = random_synth(rng, 20, 14);
  const BinaryMask m_g = oracle::random_mask(rng, 20, 14, 0.2);

  Rng a(7), b(7);
  const MixPair chained = glyphmix(first, second, synth, m_g, TimParams{}, a);
  const MixPair manual = gim(tim(first, second, TimParams{}, b), synth, m_g);
  CHECK(chained == manual);

  Rng c(7);
  CHECK(glyphmix(first, second, synth, m_g, TimParams{}, c, false) == gim(first, synth, m_g));

  // Zero glyph mask and an empty intra-domain mask give back the first triple.
  const MixPair id = gim(tim_compose(first, second, BinaryMask::Zero(14, 20)), synth, BinaryMask::Zero(14, 20));
  CHECK(id == as_mix_pair(first));
}

TEST_CASE("provenance decomposes every mixed pixel") {
  Rng rng(46);
  for (int i = 0; i < 20; ++i) {
    const int w = static_cast<int>(rng.uniform_int(4, 32)), h = static_cast<int>(rng.uniform_int(4, 32));
    const RealTriple first = oracle::random_triple(rng, w, h);
    const RealTriple second = oracle::random_triple(rng, w, h);
    const SynthPair synth = random_synth(rng, w, h);
    const BinaryMask m_g = oracle::random_mask(rng, w, h, 0.25);
    const MixPair out = glyphmix(first, second, synth, m_g, TimParams{}, rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const auto p = static_cast<Provenance>(out.provenance(y, x));
        const Image& src = p == Provenance::Synth ? synth.image : p == Provenance::Real2 ? second.image : first.image;
        for (int c = 0; c < 3; ++c) REQUIRE(out.image.at(x, y, c) == src.at(x, y, c));
        if (p == Provenance::Synth) {
          CHECK(out.label(y, x) == synth.label(y, x));
          CHECK(out.reliability(y, x) == 1);
        } else {
          const RealTriple& t = p == Provenance::Real2 ? second : first;
          CHECK(out.label(y, x) == t.label(y, x));
          CHECK(out.reliability(y, x) == t.reliability(y, x));
        }
      }
  }
}

TEST_CASE("baseline mixers") {
  Rng rng(47);
  const Image a = oracle::random_image(rng, 10, 8, 3);
  const Image b = oracle::random_image(rng, 10, 8, 3);
  CHECK(mixup(a, b, 0.0) == a);
  CHECK(mixup(a, b, 1.0) == b);
  const Image half = mixup(a, b, 0.5);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 10; ++x) CHECK(half.at(x, y, c) == (a.at(x, y, c) + b.at(x, y, c) + 1) / 2);
  CHECK_THROWS_AS(mixup(a, b, 1.5), Error);

  CHECK(cutmix(a, b, PixelRect{3, 3, 3, 6}) == a);
  CHECK(cutmix(a, b, PixelRect{0, 0, 10, 8}) == b);

  const std::vector<QuadBox> boxes{QuadBox::from_rect(1, 1, 3, 4), QuadBox::from_rect(6, 2, 8.5, 6)};
  const BinaryMask cls = label_map(boxes, 10, 8);
  const Image out = classmix(a, b, cls);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 10; ++x) {
      const bool in = oracle::inside_quad(boxes[0], {double(x), double(y)}) ||
                      oracle::inside_quad(boxes[1], {double(x), double(y)});
      CHECK(out.at(x, y, 1) == (in ? b : a).at(x, y, 1));
    }

  for (int i = 0; i < 200; ++i) {
    const PixelRect r = random_cutmix_rect(10, 8, rng);
    REQUIRE(r.x0 >= 0);
    REQUIRE(r.x1 <= 10);
    REQUIRE(r.y0 >= 0);
    REQUIRE(r.y1 <= 8);
  }
}

TEST_CASE("prepared synthetic sample pairs with the mixers") {
  Rng rng(48);
  const Image img = oracle::random_image(rng, 24, 24, 3);
  const std::vector<QuadBox> boxes{QuadBox::from_rect(2, 2, 10, 12), QuadBox::from_rect(13, 4, 21, 20)};
  StageTimes times;
  const PreparedSynth timed = prepare_synth(img, boxes, GlyphParams{}, &times);
  const PreparedSynth plain = prepare_synth(img, boxes, GlyphParams{});
  CHECK((timed.glyph_mask == plain.glyph_mask).all());
  CHECK((timed.pair.label == label_map(boxes, 24, 24)).all());
  CHECK(times.total_ms() >= 0.0);

  const RealTriple first = oracle::random_triple(rng, 24, 24);
  const RealTriple second = oracle::random_triple(rng, 24, 24);
  Rng a(3), b(3);
  const MixPair got = generate_glyphmix_pair(plain, first, second, TimParams{}, true, a, &times);
  CHECK(got == glyphmix(first, second, plain.pair, plain.glyph_mask, TimParams{}, b));
}
