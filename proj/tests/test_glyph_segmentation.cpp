#include <doctest.h>

#include <algorithm>
#include <limits>

#include "glyphforge/annotation_io.hpp"
#include "glyphforge/glyph_segmentation.hpp"
#include "glyphforge/toy_corpus.hpp"
#include "glyphforge/worker_pool.hpp"
#include "oracles.hpp"

using namespace glyphforge;

namespace {

// Best split threshold by exhaustive search over the sorted values.
std::vector<std::uint8_t> optimal_two_partition(const std::vector<std::uint8_t>& values) {
  std::vector<std::uint8_t> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double best = std::numeric_limits<double>::infinity();
  int best_t = 0;
  for (int t = sorted.front(); t < sorted.back(); ++t) {
    double cost = 0;
    for (int side = 0; side < 2; ++side) {
      double sum = 0, n = 0;
      for (auto v : sorted)
        if ((v > t) == (side == 1)) sum += v, n += 1;
      const double mean = sum / n;
      for (auto v : sorted)
        if ((v > t) == (side == 1)) cost += (v - mean) * (v - mean);
    }
    if (cost < best) best = cost, best_t = t;
  }
  std::vector<std::uint8_t> labels;
  for (auto v : values) labels.push_back(v > best_t ? 1 : 0);
  return labels;
}

// Lloyd on raw samples: min/max start, midpoint values split evenly, stop on shift < tol.
std::vector<std::uint8_t> direct_lloyd(const std::vector<std::uint8_t>& v, const GlyphParams& p) {
  double c0 = *std::min_element(v.begin(), v.end()), c1 = *std::max_element(v.begin(), v.end());
  auto side = [&](double x) { return std::abs(x - c0) < std::abs(x - c1) ? 0 : std::abs(x - c0) > std::abs(x - c1) ? 1 : 2; };
  for (int it = 0; it < p.kmeans_max_iters; ++it) {
    double s0 = 0, n0 = 0, s1 = 0, n1 = 0;
    for (auto x : v) {
      const int k = side(x);
      const double w0 = k == 0 ? 1 : k == 2 ? 0.5 : 0;
      s0 += w0 * x, n0 += w0;
      s1 += (1 - w0) * x, n1 += 1 - w0;
    }
    const double d0 = n0 > 0 ? s0 / n0 : c0, d1 = n1 > 0 ? s1 / n1 : c1;
    const double shift = std::max(std::abs(d0 - c0), std::abs(d1 - c1));
    c0 = d0, c1 = d1;
    if (shift < p.kmeans_tol) break;
  }
  std::vector<std::uint8_t> labels;
  for (auto x : v) labels.push_back(side(x) == 1 ? 1 : 0);
  return labels;
}

// Box fixture: background `bg`, glyph strokes `ink` on the pixels of `glyph`.
Image box_fixture(const BinaryMask& glyph, std::uint8_t bg, std::uint8_t ink) {
  Image img(static_cast<int>(glyph.cols()), static_cast<int>(glyph.rows()), 1, bg);
  img.plane(0) = (glyph != 0).select(Raster<std::uint8_t>::Constant(glyph.rows(), glyph.cols(), ink), img.plane(0));
  return img;
}

BinaryMask letter_h(int w, int h) {
  BinaryMask m = BinaryMask::Zero(h, w);
  m.block(2, 2, h - 4, 2).setOnes();
  m.block(2, w - 4, h - 4, 2).setOnes();
  m.block(h / 2 - 1, 2, 2, w - 4).setOnes();
  return m;
}

}  // namespace

TEST_CASE("kmeans2 examples") {
  const GlyphParams p;
  const std::vector<std::uint8_t> a{0, 0, 255, 255};
  const auto ra = kmeans2(a, p);
  CHECK(ra.labels == std::vector<std::uint8_t>{0, 0, 1, 1});
  CHECK(ra.centroids[0] == 0.0);
  CHECK(ra.centroids[1] == 255.0);

  const std::vector<std::uint8_t> b{10, 12, 200, 205, 210};
  const auto rb = kmeans2(b, p);
  CHECK(rb.labels == std::vector<std::uint8_t>{0, 0, 1, 1, 1});
  CHECK(rb.labels == optimal_two_partition(b));
  CHECK(rb.centroids[0] == doctest::Approx(11.0));
  CHECK(rb.centroids[1] == doctest::Approx(205.0));
}

TEST_CASE("kmeans2 matches a direct Lloyd iteration and the exhaustive split when separated") {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const double lo = rng.uniform(0, 100), hi = rng.uniform(150, 255);
    std::vector<std::uint8_t> v;
    const int n = static_cast<int>(rng.uniform_int(4, 60));
    for (int k = 0; k < n; ++k) {
      const double c = k % 3 ? lo : hi;
      v.push_back(static_cast<std::uint8_t>(std::clamp(c + rng.normal(0, 10), 0.0, 255.0)));
    }
    const auto r = kmeans2(v, GlyphParams{});
    CHECK(r.labels == direct_lloyd(v, GlyphParams{}));
    int max0 = -1, min1 = 256;
    for (std::size_t k = 0; k < v.size(); ++k)
      r.labels[k] ? min1 = std::min<int>(min1, v[k]) : max0 = std::max<int>(max0, v[k]);
    CHECK(max0 < min1);
    if (hi - lo > 100) CHECK(r.labels == optimal_two_partition(v));
  }
}

TEST_CASE("glyph fragment recovers known strokes in both polarities") {
  const BinaryMask truth = letter_h(12, 14);
  const QuadBox box = QuadBox::from_rect(0, 0, 11, 13);
  const GlyphParams p;

  const auto dark = glyph_mask_for_box(box_fixture(truth, 230, 20), box, p);
  REQUIRE_FALSE(dark.skipped);
  CHECK((dark.to_full(12, 14) == truth).all());

  const auto light = glyph_mask_for_box(box_fixture(truth, 20, 230), box, p);
  CHECK((light.to_full(12, 14) == truth).all());
}

TEST_CASE("uniform box is skipped") {
  const Image flat(10, 10, 3, 128);
  const auto frag = glyph_mask_for_box(flat, QuadBox::from_rect(1, 1, 8, 8), GlyphParams{});
  CHECK(frag.skipped);
  CHECK(popcount(frag.to_full(10, 10)) == 0);

  const std::vector<QuadBox> boxes{QuadBox::from_rect(1, 1, 8, 8)};
  const auto report = build_glyph_mask(flat, boxes, GlyphParams{});
  CHECK(report.boxes_skipped_degenerate == 1);
  CHECK(report.boxes_processed == 0);
}

TEST_CASE("build_glyph_mask is the union of fragments") {
  CHECK(popcount(build_glyph_mask(Image(16, 16, 3, 90), {}, GlyphParams{}).mask) == 0);

  Rng rng(32);
  const ToyScene scene = make_toy_scene(Domain::Synthetic, 64, 48, rng);
  REQUIRE(scene.char_boxes.size() >= 2);
  const std::vector<QuadBox> two{scene.char_boxes[0], scene.char_boxes[1]};
  const auto report = build_glyph_mask(scene.image, two, GlyphParams{});
  const BinaryMask manual = glyph_mask_for_box(scene.image, two[0], GlyphParams{}).to_full(64, 48).max(
      glyph_mask_for_box(scene.image, two[1], GlyphParams{}).to_full(64, 48));
  CHECK((report.mask == manual).all());
}

TEST_CASE("glyph mask stays inside the boxes and ignores the worker count") {
  WorkerPool pool(3);
  for (int i = 0; i < 30; ++i) {
    Rng rng = Rng::split(33, static_cast<std::uint64_t>(i));
    const int w = static_cast<int>(rng.uniform_int(16, 64)), h = static_cast<int>(rng.uniform_int(16, 64));
    const Image img = oracle::random_image(rng, w, h, 3);
    std::vector<QuadBox> boxes;
    for (int k = 0; k < 5; ++k) boxes.push_back(oracle::random_convex_quad(rng, w, h));
    const auto a = build_glyph_mask(img, boxes, GlyphParams{});
    const auto b = build_glyph_mask(img, boxes, GlyphParams{}, &pool);
    CHECK((a.mask == b.mask).all());
    CHECK(((a.mask != 0) && (label_map(boxes, w, h) == 0)).count() == 0);
  }
}

TEST_CASE("inverting a box leaves its glyph pixels unchanged") {
  for (int i = 0; i < 50; ++i) {
    Rng rng = Rng::split(34, static_cast<std::uint64_t>(i));
    const Image img = oracle::random_image(rng, 24, 20, 1);
    const QuadBox box = oracle::random_convex_quad(rng, 24, 20);
    Image inv = img;
    inv.plane(0) = 255 - img.plane(0);
    const auto a = glyph_mask_for_box(img, box, GlyphParams{});
    const auto b = glyph_mask_for_box(inv, box, GlyphParams{});
    CHECK(a.skipped == b.skipped);
    CHECK((a.to_full(24, 20) == b.to_full(24, 20)).all());
  }
}

TEST_CASE("glyph_pixel_fraction") {
  const BinaryMask truth = letter_h(12, 14);
  const std::vector<QuadBox> boxes{QuadBox::from_rect(0, 0, 11, 13)};
  const auto report = build_glyph_mask(box_fixture(truth, 200, 40), boxes, GlyphParams{});
  CHECK(report.glyph_pixel_fraction == doctest::Approx(double(popcount(truth)) / (12 * 14)));
}

TEST_CASE("eval_glyph_mask examples") {
  Rng rng(35);
  const BinaryMask gt = oracle::random_mask(rng, 6, 6);
  const BinaryMask all = BinaryMask::Ones(6, 6);
  CHECK(eval_glyph_mask(gt, gt, all) == 1.0);
  CHECK(eval_glyph_mask(BinaryMask(1 - gt), gt, all) == 0.0);

  BinaryMask region = BinaryMask::Zero(6, 6);
  region.block(0, 0, 2, 1).setOnes();
  BinaryMask m = gt;
  m(0, 0) = 1 - gt(0, 0);
  CHECK(eval_glyph_mask(m, gt, region) == 0.5);
  CHECK_THROWS_AS(eval_glyph_mask(gt, gt, BinaryMask::Zero(6, 6)), Error);
}

TEST_CASE("per-box clustering beats whole-image clustering on toy scenes") {
  double per_box = 0, whole = 0;
  std::size_t n = 0;
  for (Domain d : {Domain::Synthetic, Domain::Real}) {
    for (const auto& s : make_toy_corpus(d, 20, 96, 96, 36)) {
      const auto m = build_glyph_mask(s.image, s.char_boxes, GlyphParams{}).mask;
      per_box += eval_glyph_mask(m, s.glyph_truth, s.text_truth);
      whole += eval_glyph_mask(whole_image_glyph_mask(s.image, GlyphParams{}), s.glyph_truth, s.text_truth);
      ++n;
    }
  }
  CHECK(per_box / n >= 0.8);
  CHECK(per_box > whole);
}
