#include "glyphforge/glyph_segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "glyphforge/worker_pool.hpp"

namespace glyphforge {

void GlyphParams::validate() const {
  if (kmeans_max_iters < 1) throw Error("GlyphParams: kmeans_max_iters must be >= 1");
  if (kmeans_tol < 0 || min_intensity_range < 0 || border_vote_margin < 0)
    throw Error("GlyphParams: tolerances must be >= 0");
}

namespace {

struct Histogram {
  std::array<std::int64_t, 256> count{};
  int lo = 255;
  int hi = 0;
};

Histogram histogram(std::span<const std::uint8_t> values) {
  Histogram h;
  for (auto v : values) ++h.count[v];
  for (int v = 0; v < 256; ++v) {
    if (h.count[static_cast<std::size_t>(v)] == 0) continue;
    h.lo = std::min(h.lo, v);
    h.hi = std::max(h.hi, v);
  }
  return h;
}

constexpr std::uint8_t kTie = 2;

// Nearest centroid, or kTie at the exact midpoint.
inline std::uint8_t assign(double v, const std::array<double, 2>& c) {
  const double d0 = std::abs(v - c[0]);
  const double d1 = std::abs(v - c[1]);
  return d0 < d1 ? 0 : d1 < d0 ? 1 : kTie;
}

// Lloyd iterations on the histogram; returns a 256-entry lookup of 0, 1 or
// kTie. Tied values count half toward each centroid, which keeps the result
// mirror-symmetric under intensity inversion.
std::array<std::uint8_t, 256> lloyd(const Histogram& h, const GlyphParams& params, std::array<double, 2>& centroids,
                                    int& iterations) {
  centroids = {static_cast<double>(h.lo), static_cast<double>(h.hi)};
  iterations = 0;
  for (int it = 0; it < params.kmeans_max_iters; ++it) {
    double sum[2] = {0, 0};
    double n[2] = {0, 0};
    for (int v = h.lo; v <= h.hi; ++v) {
      const auto c = static_cast<double>(h.count[static_cast<std::size_t>(v)]);
      if (c == 0) continue;
      const auto k = assign(v, centroids);
      for (int j = 0; j < 2; ++j) {
        const double share = k == kTie ? 0.5 : (k == j ? 1.0 : 0.0);
        sum[j] += share * v * c;
        n[j] += share * c;
      }
    }
    std::array<double, 2> next = centroids;
    for (int k = 0; k < 2; ++k)
      if (n[k] > 0) next[static_cast<std::size_t>(k)] = sum[k] / n[k];
    const double shift = std::max(std::abs(next[0] - centroids[0]), std::abs(next[1] - centroids[1]));
    centroids = next;
    iterations = it + 1;
    if (shift < params.kmeans_tol) break;
  }
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = assign(v, centroids);
  return lut;
}

// Chooses the glyph cluster from ring membership counts and total counts.
// Returns -1 when the vote is fully symmetric.
int pick_glyph_cluster(const std::int64_t ring[2], const std::int64_t total[2], double margin) {
  const double ring_size = static_cast<double>(ring[0] + ring[1]);
  if (ring_size > 0) {
    const double share0 = static_cast<double>(ring[0]) / ring_size;
    const double share1 = static_cast<double>(ring[1]) / ring_size;
    if (std::abs(share0 - share1) > margin && share0 != share1) return share0 < share1 ? 0 : 1;
  }
  if (total[0] == total[1]) return -1;
  return total[0] < total[1] ? 0 : 1;
}

}  // namespace

KMeansResult kmeans2(std::span<const std::uint8_t> values, const GlyphParams& params) {
  KMeansResult result;
  if (values.empty()) return result;
  const Histogram h = histogram(values);
  const auto lut = lloyd(h, params, result.centroids, result.iterations);
  result.labels.reserve(values.size());
  for (auto v : values) result.labels.push_back(lut[v] == kTie ? 0 : lut[v]);
  return result;
}

BinaryMask GlyphFragment::to_full(int width, int height) const {
  BinaryMask mask = BinaryMask::Zero(height, width);
  merge_into(mask);
  return mask;
}

void GlyphFragment::merge_into(BinaryMask& mask) const {
  if (skipped || rect.empty()) return;
  auto block = mask.block(rect.y0, rect.x0, rect.height(), rect.width());
  block = block.max(local);
}

GlyphFragment glyph_mask_for_box(const Raster<std::uint8_t>& gray, const QuadBox& box, const GlyphParams& params) {
  const int width = static_cast<int>(gray.cols());
  const int height = static_cast<int>(gray.rows());
  GlyphFragment frag;
  frag.rect = quad_pixel_bounds(box, width, height);
  if (frag.rect.empty()) {
    frag.skipped = true;
    return frag;
  }
  const int rw = frag.rect.width();
  const int rh = frag.rect.height();

  // Crop: the quad interior inside its axis-aligned bounding rectangle.
  QuadBox local_box = box;
  for (Point* p : {&local_box.lt, &local_box.lb, &local_box.rt, &local_box.rb}) {
    p->x -= frag.rect.x0;
    p->y -= frag.rect.y0;
  }
  BinaryMask region = BinaryMask::Zero(rh, rw);
  fill_quad(local_box, region);

  Histogram h;
  std::int64_t area = 0;
  for (int y = 0; y < rh; ++y)
    for (int x = 0; x < rw; ++x)
      if (region(y, x)) {
        const auto v = gray(frag.rect.y0 + y, frag.rect.x0 + x);
        ++h.count[v];
        h.lo = std::min<int>(h.lo, v);
        h.hi = std::max<int>(h.hi, v);
        ++area;
      }
  if (area == 0 || h.hi - h.lo < params.min_intensity_range) {
    frag.skipped = true;
    frag.local = BinaryMask::Zero(rh, rw);
    return frag;
  }

  std::array<double, 2> centroids{};
  int iterations = 0;
  const auto lut = lloyd(h, params, centroids, iterations);

  std::int64_t ring[2] = {0, 0};
  std::int64_t total[2] = {0, 0};
  auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < rw && y < rh && region(y, x) != 0; };
  frag.local = BinaryMask::Zero(rh, rw);
  for (int y = 0; y < rh; ++y)
    for (int x = 0; x < rw; ++x) {
      if (!region(y, x)) continue;
      const auto k = lut[gray(frag.rect.y0 + y, frag.rect.x0 + x)];
      frag.local(y, x) = k;  // temporarily holds the cluster label
      if (k == kTie) continue;
      ++total[k];
      if (!inside(x - 1, y) || !inside(x + 1, y) || !inside(x, y - 1) || !inside(x, y + 1)) ++ring[k];
    }
  const int glyph = pick_glyph_cluster(ring, total, params.border_vote_margin);
  if (glyph < 0) {
    frag.skipped = true;
    frag.local.setZero();
    return frag;
  }
  for (int y = 0; y < rh; ++y)
    for (int x = 0; x < rw; ++x)
      frag.local(y, x) = (region(y, x) && frag.local(y, x) == glyph) ? 1 : 0;
  return frag;
}

GlyphFragment glyph_mask_for_box(const Image& img, const QuadBox& box, const GlyphParams& params) {
  return glyph_mask_for_box(to_grayscale(img).plane(0), box, params);
}

GlyphMaskReport build_glyph_mask(const Image& img, std::span<const QuadBox> boxes, const GlyphParams& params,
                                 WorkerPool* pool) {
  params.validate();
  const Image gray_img = to_grayscale(img);
  const auto& gray = gray_img.plane(0);
  std::vector<GlyphFragment> fragments(boxes.size());
  auto work = [&](std::size_t i) { fragments[i] = glyph_mask_for_box(gray, boxes[i], params); };
  if (pool)
    pool->parallel_for(boxes.size(), work);
  else
    for (std::size_t i = 0; i < boxes.size(); ++i) work(i);

  GlyphMaskReport report;
  report.mask = BinaryMask::Zero(img.height(), img.width());
  for (const auto& f : fragments) {
    if (f.skipped) {
      ++report.boxes_skipped_degenerate;
      continue;
    }
    ++report.boxes_processed;
    f.merge_into(report.mask);
  }
  BinaryMask region = BinaryMask::Zero(img.height(), img.width());
  for (const auto& b : boxes) fill_quad(b, region);
  const auto region_px = popcount(region);
  report.glyph_pixel_fraction =
      region_px > 0 ? static_cast<double>(popcount(report.mask)) / static_cast<double>(region_px) : 0.0;
  return report;
}

BinaryMask whole_image_glyph_mask(const Image& img, const GlyphParams& params) {
  const Image gray_img = to_grayscale(img);
  const auto& gray = gray_img.plane(0);
  const int w = img.width();
  const int h = img.height();
  std::span<const std::uint8_t> values(gray.data(), static_cast<std::size_t>(gray.size()));
  const Histogram hist = histogram(values);
  BinaryMask mask = BinaryMask::Zero(h, w);
  if (hist.hi - hist.lo < params.min_intensity_range) return mask;
  std::array<double, 2> centroids{};
  int iterations = 0;
  const auto lut = lloyd(hist, params, centroids, iterations);
  std::int64_t ring[2] = {0, 0};
  std::int64_t total[2] = {0, 0};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto k = lut[gray(y, x)];
      if (k == kTie) continue;
      ++total[k];
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) ++ring[k];
    }
  const int glyph = pick_glyph_cluster(ring, total, params.border_vote_margin);
  if (glyph < 0) return mask;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) mask(y, x) = lut[gray(y, x)] == glyph ? 1 : 0;
  return mask;
}

double eval_glyph_mask(const BinaryMask& mask, const BinaryMask& ground_truth, const BinaryMask& region) {
  require_same_shape(mask, ground_truth, "eval_glyph_mask");
  require_same_shape(mask, region, "eval_glyph_mask");
  const auto in_region = region != 0;
  const auto size = in_region.count();
  if (size == 0) throw Error("eval_glyph_mask: empty evaluation region");
  const auto matches = (in_region && ((mask != 0) == (ground_truth != 0))).count();
  return static_cast<double>(matches) / static_cast<double>(size);
}

}  // namespace glyphforge
