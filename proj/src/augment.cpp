#include "glyphforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace glyphforge {

void AugmentationSpec::validate() const {
  if (flip_prob < 0 || flip_prob > 1 || grayscale_prob < 0 || grayscale_prob > 1)
    throw Error("AugmentationSpec: probabilities must be in [0, 1]");
  if (!(scale_min > 0) || scale_max < scale_min) throw Error("AugmentationSpec: need 0 < scale_min <= scale_max");
  if (brightness < 0 || brightness >= 1 || contrast < 0 || contrast >= 1)
    throw Error("AugmentationSpec: brightness/contrast jitter must be in [0, 1)");
  if (blur_sigma_max < 0) throw Error("AugmentationSpec: blur_sigma_max must be >= 0");
}

Point GeometricTransform::apply(const Point& p, int width, int height) const {
  const double cx = (width - 1) * 0.5;
  const double cy = (height - 1) * 0.5;
  Point q{cx + scale * (p.x - cx), cy + scale * (p.y - cy)};
  if (flip) q.x = (width - 1) - q.x;
  return q;
}

Point GeometricTransform::inverse(const Point& q, int width, int height) const {
  const double cx = (width - 1) * 0.5;
  const double cy = (height - 1) * 0.5;
  const double qx = flip ? (width - 1) - q.x : q.x;
  return {cx + (qx - cx) / scale, cy + (q.y - cy) / scale};
}

GeometricTransform sample_geometric(const AugmentationSpec& spec, Rng& rng) {
  GeometricTransform t;
  t.flip = rng.bernoulli(spec.flip_prob);
  t.scale = rng.uniform(spec.scale_min, spec.scale_max);
  return t;
}

PhotometricTransform sample_photometric(const AugmentationSpec& spec, Rng& rng) {
  PhotometricTransform t;
  t.brightness = rng.uniform(1.0 - spec.brightness, 1.0 + spec.brightness);
  t.contrast = rng.uniform(1.0 - spec.contrast, 1.0 + spec.contrast);
  t.grayscale = rng.bernoulli(spec.grayscale_prob);
  t.blur_sigma = rng.uniform(0.0, spec.blur_sigma_max);
  return t;
}

namespace {

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); }

}  // namespace

Image warp_image(const Image& img, const GeometricTransform& t) {
  const int w = img.width();
  const int h = img.height();
  Image out(w, h, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Point s = t.inverse({static_cast<double>(x), static_cast<double>(y)}, w, h);
      const double sx = std::clamp(s.x, 0.0, static_cast<double>(w - 1));
      const double sy = std::clamp(s.y, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int c = 0; c < img.channels(); ++c) {
        const auto& p = img.plane(c);
        const double top = p(y0, x0) * (1 - fx) + p(y0, x1) * fx;
        const double bot = p(y1, x0) * (1 - fx) + p(y1, x1) * fx;
        out.plane(c)(y, x) = to_u8(top * (1 - fy) + bot * fy);
      }
    }
  return out;
}

BinaryMask warp_mask(const BinaryMask& mask, const GeometricTransform& t) {
  const int w = static_cast<int>(mask.cols());
  const int h = static_cast<int>(mask.rows());
  BinaryMask out = BinaryMask::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Point s = t.inverse({static_cast<double>(x), static_cast<double>(y)}, w, h);
      const double rx = std::floor(s.x + 0.5);
      const double ry = std::floor(s.y + 0.5);
      if (rx < 0 || ry < 0 || rx > w - 1 || ry > h - 1) continue;
      out(y, x) = mask(static_cast<int>(ry), static_cast<int>(rx));
    }
  return out;
}

QuadBox warp_box(const QuadBox& box, const GeometricTransform& t, int width, int height) {
  QuadBox out{t.apply(box.lt, width, height), t.apply(box.lb, width, height), t.apply(box.rt, width, height),
              t.apply(box.rb, width, height)};
  if (t.flip) {
    std::swap(out.lt, out.rt);
    std::swap(out.lb, out.rb);
  }
  return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma < 0.1) return img;
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width();
  const int h = img.height();
  Image out(w, h, img.channels());
  Raster<double> tmp(h, w);
  for (int c = 0; c < img.channels(); ++c) {
    const auto& p = img.plane(c);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * p(y, std::clamp(x + i, 0, w - 1));
        tmp(y, x) = acc;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp(std::clamp(y + i, 0, h - 1), x);
        out.plane(c)(y, x) = to_u8(acc);
      }
  }
  return out;
}

Image apply_photometric(const Image& img, const PhotometricTransform& t) {
  Image out = img;
  double mean = 0;
  for (int c = 0; c < img.channels(); ++c) mean += img.plane(c).cast<double>().mean();
  mean = mean / img.channels() * t.brightness;
  for (int c = 0; c < img.channels(); ++c) {
    const Raster<double> v = (img.plane(c).cast<double>() * t.brightness - mean) * t.contrast + mean;
    out.plane(c) = (v + 0.5).floor().max(0.0).min(255.0).cast<std::uint8_t>();
  }
  if (t.grayscale && out.channels() == 3) {
    const Image g = to_grayscale(out);
    for (int c = 0; c < 3; ++c) out.plane(c) = g.plane(0);
  }
  return gaussian_blur(out, t.blur_sigma);
}

Image resize_image(const Image& img, int width, int height) {
  if (width == img.width() && height == img.height()) return img;
  Image out(width, height, img.channels());
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double fx0 = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const double fy0 = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const int y1 = std::min(y0 + 1, img.height() - 1);
      const double fx = fx0 - x0;
      const double fy = fy0 - y0;
      for (int c = 0; c < img.channels(); ++c) {
        const auto& p = img.plane(c);
        const double top = p(y0, x0) * (1 - fx) + p(y0, x1) * fx;
        const double bot = p(y1, x0) * (1 - fx) + p(y1, x1) * fx;
        out.plane(c)(y, x) = to_u8(top * (1 - fy) + bot * fy);
      }
    }
  return out;
}

}  // namespace glyphforge
