#include "glyphforge/mixing.hpp"

#include <algorithm>
#include <cmath>

namespace glyphforge {

Image masked_compose(const Image& a, const Image& b, const BinaryMask& m) {
  require_same_shape(a, b, "masked_compose");
  require_same_shape(a, m, "masked_compose");
  Image out = a;
  for (int c = 0; c < a.channels(); ++c) out.plane(c) = masked_compose(a.plane(c), b.plane(c), m);
  return out;
}

Image to_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.width(), img.height(), 3);
  for (int c = 0; c < 3; ++c) out.plane(c) = img.plane(0);
  return out;
}

namespace {

void check_real(const RealTriple& r, const char* what) {
  require_same_shape(r.image, r.label, what);
  require_same_shape(r.image, r.reliability, what);
}

}  // namespace

MixPair as_mix_pair(const RealTriple& real) {
  check_real(real, "as_mix_pair");
  return MixPair{real.image, real.label, real.reliability,
                 ProvenanceMap::Constant(real.image.height(), real.image.width(),
                                         static_cast<std::uint8_t>(Provenance::Real1))};
}

MixPair gim(const MixPair& real, const SynthPair& synth, const BinaryMask& m_g) {
  require_same_shape(real.image, synth.image, "gim");
  require_same_shape(real.image, synth.label, "gim");
  require_same_shape(real.image, m_g, "gim");
  require_same_shape(real.label, real.reliability, "gim");
  const int h = real.image.height();
  const int w = real.image.width();
  MixPair out;
  out.image = masked_compose(synth.image, real.image, m_g);
  out.label = masked_compose(synth.label, real.label, m_g);
  out.reliability = masked_compose(BinaryMask::Ones(h, w), real.reliability, m_g);
  out.provenance = masked_compose(
      ProvenanceMap::Constant(h, w, static_cast<std::uint8_t>(Provenance::Synth)), real.provenance, m_g);
  return out;
}

MixPair gim(const RealTriple& real, const SynthPair& synth, const BinaryMask& m_g) {
  return gim(as_mix_pair(real), synth, m_g);
}

void TimParams::validate() const {
  if (num_candidates < 1) throw Error("TimParams: num_candidates must be >= 1");
  if (!(side_fraction_min > 0.0) || side_fraction_max > 1.0 || side_fraction_min > side_fraction_max)
    throw Error("TimParams: side fractions must satisfy 0 < min <= max <= 1");
}

std::vector<PixelRect> tim_candidates(int width, int height, const TimParams& params, Rng& rng) {
  params.validate();
  std::vector<PixelRect> rects;
  rects.reserve(static_cast<std::size_t>(params.num_candidates));
  for (int i = 0; i < params.num_candidates; ++i) {
    const double fw = rng.uniform(params.side_fraction_min, params.side_fraction_max);
    const double fh = rng.uniform(params.side_fraction_min, params.side_fraction_max);
    const int rw = std::clamp(static_cast<int>(std::lround(fw * width)), 1, width);
    const int rh = std::clamp(static_cast<int>(std::lround(fh * height)), 1, height);
    const int x0 = static_cast<int>(rng.uniform_int(0, width - rw));
    const int y0 = static_cast<int>(rng.uniform_int(0, height - rh));
    rects.push_back({x0, y0, x0 + rw, y0 + rh});
  }
  return rects;
}

std::size_t tim_argmax(const BinaryMask& y2, const std::vector<PixelRect>& candidates) {
  std::size_t best = 0;
  std::int64_t best_sum = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& r = candidates[i];
    std::int64_t sum = 0;
    if (!r.empty())
      sum = y2.block(r.y0, r.x0, r.height(), r.width()).cast<std::int64_t>().sum();
    if (sum > best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return best;
}

TimSelection tim_select_mask(const BinaryMask& y2, const TimParams& params, Rng& rng) {
  const int w = static_cast<int>(y2.cols());
  const int h = static_cast<int>(y2.rows());
  TimSelection sel;
  sel.candidates = tim_candidates(w, h, params, rng);
  sel.chosen_index = tim_argmax(y2, sel.candidates);
  sel.mask = rect_mask(sel.candidates[sel.chosen_index], w, h);
  return sel;
}

MixPair tim_compose(const RealTriple& first, const RealTriple& second, const BinaryMask& m_t) {
  check_real(first, "tim");
  check_real(second, "tim");
  require_same_shape(first.image, second.image, "tim");
  require_same_shape(first.image, m_t, "tim");
  const int h = first.image.height();
  const int w = first.image.width();
  MixPair out;
  out.image = masked_compose(second.image, first.image, m_t);
  out.label = masked_compose(second.label, first.label, m_t);
  out.reliability = masked_compose(second.reliability, first.reliability, m_t);
  out.provenance = masked_compose(ProvenanceMap::Constant(h, w, static_cast<std::uint8_t>(Provenance::Real2)),
                                  ProvenanceMap::Constant(h, w, static_cast<std::uint8_t>(Provenance::Real1)), m_t);
  return out;
}

MixPair tim(const RealTriple& first, const RealTriple& second, const TimParams& params, Rng& rng) {
  const auto sel = tim_select_mask(second.label, params, rng);
  return tim_compose(first, second, sel.mask);
}

MixPair glyphmix(const RealTriple& first, const RealTriple& second, const SynthPair& synth,
                 const BinaryMask& m_g, const TimParams& params, Rng& rng, bool use_tim) {
  const MixPair real = use_tim ? tim(first, second, params, rng) : as_mix_pair(first);
  return gim(real, synth, m_g);
}

Image mixup(const Image& base, const Image& donor, double lambda) {
  require_same_shape(base, donor, "mixup");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("mixup: lambda must be in [0, 1]");
  Image out = base;
  for (int c = 0; c < base.channels(); ++c) {
    const Raster<double> blend =
        (1.0 - lambda) * base.plane(c).cast<double>() + lambda * donor.plane(c).cast<double>();
    out.plane(c) = (blend + 0.5).floor().min(255.0).max(0.0).cast<std::uint8_t>();
  }
  return out;
}

Image cutmix(const Image& base, const Image& donor, const PixelRect& rect) {
  require_same_shape(base, donor, "cutmix");
  return masked_compose(donor, base, rect_mask(rect, base.width(), base.height()));
}

Image classmix(const Image& base, const Image& donor, const BinaryMask& class_mask) {
  require_same_shape(base, donor, "classmix");
  return masked_compose(donor, base, class_mask);
}

PixelRect random_cutmix_rect(int width, int height, Rng& rng) {
  const double lambda = rng.uniform();
  const double ratio = std::sqrt(1.0 - lambda);
  const int cut_w = static_cast<int>(std::lround(width * ratio));
  const int cut_h = static_cast<int>(std::lround(height * ratio));
  const int cx = static_cast<int>(rng.uniform_int(0, width - 1));
  const int cy = static_cast<int>(rng.uniform_int(0, height - 1));
  return PixelRect{std::clamp(cx - cut_w / 2, 0, width), std::clamp(cy - cut_h / 2, 0, height),
                   std::clamp(cx + cut_w - cut_w / 2, 0, width), std::clamp(cy + cut_h - cut_h / 2, 0, height)};
}

}  // namespace glyphforge
