#pragma once

// Brute-force reference implementations used by the tests. Each one works
// pixel by pixel and shares no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "glyphforge/core_types.hpp"
#include "glyphforge/mixing.hpp"
#include "glyphforge/rng.hpp"

namespace oracle {

using namespace glyphforge;

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(const Point& p, const Point& a, const Point& b) {
  if (cross(a, b, p) != 0.0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Even-odd crossing test with the boundary counted as inside. Exact when all
// coordinates are small dyadic rationals.
inline bool inside_quad(const QuadBox& q, const Point& p) {
  const auto poly = q.polygon();
  for (int i = 0; i < 4; ++i)
    if (on_segment(p, poly[i], poly[(i + 1) % 4])) return true;
  bool in = false;
  for (int i = 0; i < 4; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % 4];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

inline BinaryMask raster(const QuadBox& q, int w, int h) {
  BinaryMask m = BinaryMask::Zero(h, w);
  if (q.signed_area() == 0.0) return m;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(y, x) = inside_quad(q, {double(x), double(y)}) ? 1 : 0;
  return m;
}

inline BinaryMask raster_union(const std::vector<QuadBox>& boxes, int w, int h) {
  BinaryMask m = BinaryMask::Zero(h, w);
  for (const auto& b : boxes) m = m.max(raster(b, w, h));
  return m;
}

// Coordinates on a quarter-pixel grid keep every oracle comparison exact.
inline double quarter(Rng& rng, double lo, double hi) {
  return std::round(rng.uniform(lo, hi) * 4.0) / 4.0;
}

inline QuadBox random_rect(Rng& rng, int w, int h) {
  double x0 = quarter(rng, -2, w + 1), x1 = quarter(rng, -2, w + 1);
  double y0 = quarter(rng, -2, h + 1), y1 = quarter(rng, -2, h + 1);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  if (x1 - x0 < 1) x1 = x0 + 1;
  if (y1 - y0 < 1) y1 = y0 + 1;
  return QuadBox::from_rect(x0, y0, x1, y1);
}

// Convex quad: a jittered rectangle whose jitter stays below half the side.
inline QuadBox random_convex_quad(Rng& rng, int w, int h) {
  const double cx = quarter(rng, 0, w - 1), cy = quarter(rng, 0, h - 1);
  const double hw = quarter(rng, 2, w / 2.0), hh = quarter(rng, 2, h / 2.0);
  auto j = [&](double s) { return quarter(rng, -s / 3, s / 3); };
  QuadBox q;
  q.lt = {cx - hw + j(hw), cy - hh + j(hh)};
  q.rt = {cx + hw + j(hw), cy - hh + j(hh)};
  q.rb = {cx + hw + j(hw), cy + hh + j(hh)};
  q.lb = {cx - hw + j(hw), cy + hh + j(hh)};
  return q;
}

inline Image random_image(Rng& rng, int w, int h, int channels) {
  Image img(w, h, channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(x, y, c) = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

inline BinaryMask random_mask(Rng& rng, int w, int h, double p = 0.5) {
  BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(y, x) = rng.bernoulli(p) ? 1 : 0;
  return m;
}

inline RealTriple random_triple(Rng& rng, int w, int h) {
  return {random_image(rng, w, h, 3), random_mask(rng, w, h, 0.3), random_mask(rng, w, h, 0.6)};
}

// Per-pixel selection: out = m ? a : b on every plane and map.
inline MixPair compose(const MixPair& a, const MixPair& b, const BinaryMask& m) {
  MixPair out = b;
  for (int y = 0; y < m.rows(); ++y)
    for (int x = 0; x < m.cols(); ++x) {
      if (!m(y, x)) continue;
      for (int c = 0; c < a.image.channels(); ++c) out.image.at(x, y, c) = a.image.at(x, y, c);
      out.label(y, x) = a.label(y, x);
      out.reliability(y, x) = a.reliability(y, x);
      out.provenance(y, x) = a.provenance(y, x);
    }
  return out;
}

inline MixPair from_triple(const RealTriple& t, Provenance p) {
  const int w = t.image.width(), h = t.image.height();
  return {t.image, t.label, t.reliability, ProvenanceMap::Constant(h, w, static_cast<std::uint8_t>(p))};
}

inline MixPair from_synth(const SynthPair& s) {
  const int w = s.image.width(), h = s.image.height();
  return {s.image, s.label, BinaryMask::Ones(h, w),
          ProvenanceMap::Constant(h, w, static_cast<std::uint8_t>(Provenance::Synth))};
}

inline MixPair gim(const RealTriple& real, const SynthPair& synth, const BinaryMask& m_g) {
  return compose(from_synth(synth), from_triple(real, Provenance::Real1), m_g);
}

inline MixPair tim(const RealTriple& first, const RealTriple& second, const BinaryMask& m_t) {
  return compose(from_triple(second, Provenance::Real2), from_triple(first, Provenance::Real1), m_t);
}

inline MixPair glyphmix(const RealTriple& first, const RealTriple& second, const SynthPair& synth,
                        const BinaryMask& m_t, const BinaryMask& m_g) {
  return compose(from_synth(synth), tim(first, second, m_t), m_g);
}

inline BinaryMask rect(const PixelRect& r, int w, int h) {
  BinaryMask m = BinaryMask::Zero(h, w);
  for (int y = std::max(0, r.y0); y < std::min(h, r.y1); ++y)
    for (int x = std::max(0, r.x0); x < std::min(w, r.x1); ++x) m(y, x) = 1;
  return m;
}

inline std::int64_t rect_sum(const BinaryMask& y2, const PixelRect& r) {
  std::int64_t s = 0;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) s += y2(y, x);
  return s;
}

inline std::size_t argmax_rect(const BinaryMask& y2, const std::vector<PixelRect>& candidates) {
  std::size_t best = 0;
  std::int64_t best_sum = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::int64_t s = rect_sum(y2, candidates[i]);
    if (s > best_sum) {
      best = i;
      best_sum = s;
    }
  }
  return best;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace oracle
