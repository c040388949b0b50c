#include "glyphforge/core_types.hpp"

#include <algorithm>
#include <cmath>

namespace glyphforge {

Image::Image(int width, int height, int channels, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error("Image: width and height must be >= 1");
  if (channels != 1 && channels != 3) throw Error("Image: channels must be 1 or 3");
  planes_.assign(static_cast<std::size_t>(channels), Raster<std::uint8_t>::Constant(height, width, fill));
}

Image Image::from_interleaved(int width, int height, int channels, std::span<const std::uint8_t> data) {
  Image img(width, height, channels);
  if (data.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error("Image: data length does not match width * height * channels");
  }
  std::size_t i = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) img.planes_[static_cast<std::size_t>(c)](y, x) = data[i++];
  return img;
}

Image Image::from_plane(Raster<std::uint8_t> gray) {
  Image img(static_cast<int>(gray.cols()), static_cast<int>(gray.rows()), 1);
  img.planes_[0] = std::move(gray);
  return img;
}

std::vector<std::uint8_t> Image::interleaved() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width_) * height_ * planes_.size());
  std::size_t i = 0;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      for (const auto& p : planes_) out[i++] = p(y, x);
  return out;
}

bool Image::operator==(const Image& other) const {
  if (width_ != other.width_ || height_ != other.height_ || planes_.size() != other.planes_.size())
    return false;
  for (std::size_t c = 0; c < planes_.size(); ++c)
    if ((planes_[c] != other.planes_[c]).any()) return false;
  return true;
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  auto on_segment = [](const Point& a, const Point& b, const Point& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
         (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

constexpr double kEdgeTol = 1e-9;

}  // namespace

double QuadBox::signed_area() const {
  const auto poly = polygon();
  double a = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % 4];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

bool QuadBox::is_simple() const {
  const auto p = polygon();
  // Opposite edges must not touch; adjacent edges share exactly one vertex.
  return !segments_intersect(p[0], p[1], p[2], p[3]) && !segments_intersect(p[1], p[2], p[3], p[0]);
}

bool QuadBox::is_finite() const {
  for (const auto& p : polygon())
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  return true;
}

bool QuadBox::within(int width, int height, double margin) const {
  for (const auto& p : polygon()) {
    if (p.x < -margin || p.x > width + margin || p.y < -margin || p.y > height + margin) return false;
  }
  return true;
}

QuadBox QuadBox::from_rect(double x0, double y0, double x1, double y1) {
  return QuadBox{{x0, y0}, {x0, y1}, {x1, y0}, {x1, y1}};
}

Image to_grayscale(const Image& img) {
  if (img.channels() == 1) return img;
  Raster<std::uint8_t> gray(img.height(), img.width());
  const auto& r = img.plane(0);
  const auto& g = img.plane(1);
  const auto& b = img.plane(2);
  for (Eigen::Index i = 0; i < gray.size(); ++i) {
    const int v = 299 * r.data()[i] + 587 * g.data()[i] + 114 * b.data()[i];
    gray.data()[i] = static_cast<std::uint8_t>((v + 500) / 1000);
  }
  return Image::from_plane(std::move(gray));
}

Plane gray_plane(const Image& img) { return to_grayscale(img).plane(0).cast<float>(); }

PixelRect quad_pixel_bounds(const QuadBox& box, int width, int height) {
  double minx = box.lt.x, maxx = box.lt.x, miny = box.lt.y, maxy = box.lt.y;
  for (const auto& p : box.polygon()) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  auto lo = [](double v, int hi) {
    return static_cast<int>(std::clamp(std::ceil(v - kEdgeTol), 0.0, static_cast<double>(hi)));
  };
  auto up = [](double v, int hi) {
    return static_cast<int>(std::clamp(std::floor(v + kEdgeTol) + 1.0, 0.0, static_cast<double>(hi)));
  };
  PixelRect r{lo(minx, width), lo(miny, height), up(maxx, width), up(maxy, height)};
  if (r.x1 < r.x0) r.x1 = r.x0;
  if (r.y1 < r.y0) r.y1 = r.y0;
  return r;
}

BinaryMask rasterize_quad(const QuadBox& box, int width, int height) {
  if (width < 1 || height < 1) throw Error("rasterize_quad: width and height must be >= 1");
  BinaryMask mask = BinaryMask::Zero(height, width);
  fill_quad(box, mask);
  return mask;
}

void fill_quad(const QuadBox& box, BinaryMask& mask) {
  const int width = static_cast<int>(mask.cols());
  const int height = static_cast<int>(mask.rows());
  if (width < 1 || height < 1) return;
  if (!box.is_finite() || std::abs(box.signed_area()) <= 0.0) return;

  const auto poly = box.polygon();
  const PixelRect bounds = quad_pixel_bounds(box, width, height);
  std::vector<std::pair<double, double>> spans;
  std::vector<double> crossings;
  for (int y = bounds.y0; y < bounds.y1; ++y) {
    const double sy = y;
    spans.clear();
    crossings.clear();
    for (std::size_t i = 0; i < 4; ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % 4];
      if (std::abs(a.y - sy) <= kEdgeTol && std::abs(b.y - sy) <= kEdgeTol) {
        spans.emplace_back(std::min(a.x, b.x), std::max(a.x, b.x));
        continue;
      }
      const double lo = std::min(a.y, b.y);
      const double hi = std::max(a.y, b.y);
      if (sy < lo - kEdgeTol || sy > hi + kEdgeTol) continue;
      const double t = (sy - a.y) / (b.y - a.y);
      const double x = a.x + t * (b.x - a.x);
      // Every edge touching the scanline contributes a boundary point; only
      // half-open crossings participate in the even-odd interior spans.
      spans.emplace_back(x, x);
      if ((a.y <= sy && sy < b.y) || (b.y <= sy && sy < a.y)) crossings.push_back(x);
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) spans.emplace_back(crossings[i], crossings[i + 1]);
    for (const auto& [x0, x1] : spans) {
      const int ix0 = std::max(bounds.x0, static_cast<int>(std::ceil(x0 - kEdgeTol)));
      const int ix1 = std::min(bounds.x1 - 1, static_cast<int>(std::floor(x1 + kEdgeTol)));
      for (int x = ix0; x <= ix1; ++x) mask(y, x) = 1;
    }
  }
}

BinaryMask rect_mask(const PixelRect& rect, int width, int height) {
  BinaryMask mask = BinaryMask::Zero(height, width);
  const int x0 = std::clamp(rect.x0, 0, width), x1 = std::clamp(rect.x1, 0, width);
  const int y0 = std::clamp(rect.y0, 0, height), y1 = std::clamp(rect.y1, 0, height);
  if (x1 > x0 && y1 > y0) mask.block(y0, x0, y1 - y0, x1 - x0).setOnes();
  return mask;
}

LogitMap clamp_logits(LogitMap values) { return values.max(kLogitEps).min(1.0 - kLogitEps); }

std::int64_t popcount(const BinaryMask& mask) { return mask.cast<std::int64_t>().sum(); }

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    throw DimensionMismatch(std::string(what) + ": image dimension mismatch");
}

void require_same_shape(const Image& a, const BinaryMask& m, const char* what) {
  if (a.width() != m.cols() || a.height() != m.rows())
    throw DimensionMismatch(std::string(what) + ": mask dimension mismatch");
}

}  // namespace glyphforge
