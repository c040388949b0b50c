#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace glyphforge {

/// Dense row-major raster. Rows index y, columns index x.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// H x W map with values in {0, 1}.
using BinaryMask = Raster<std::uint8_t>;

/// H x W map of probabilities clamped to [kLogitEps, 1 - kLogitEps].
using LogitMap = Raster<double>;

/// Floating point single-channel working plane (grayscale, features).
using Plane = Raster<float>;

inline constexpr double kLogitEps = 1e-6;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// 8-bit image with 1 or 3 channels, stored as one plane per channel.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::uint8_t fill = 0);

  /// Builds from interleaved row-major samples (RGBRGB... or GGG...).
  static Image from_interleaved(int width, int height, int channels,
                                std::span<const std::uint8_t> data);
  static Image from_plane(Raster<std::uint8_t> gray);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return static_cast<int>(planes_.size()); }
  bool empty() const { return planes_.empty(); }

  Raster<std::uint8_t>& plane(int c) { return planes_.at(static_cast<std::size_t>(c)); }
  const Raster<std::uint8_t>& plane(int c) const {
    return planes_.at(static_cast<std::size_t>(c));
  }

  std::uint8_t at(int x, int y, int c) const { return planes_[static_cast<std::size_t>(c)](y, x); }
  std::uint8_t& at(int x, int y, int c) { return planes_[static_cast<std::size_t>(c)](y, x); }

  /// Row-major interleaved copy; length is width * height * channels.
  std::vector<std::uint8_t> interleaved() const;

  bool operator==(const Image& other) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Raster<std::uint8_t>> planes_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Four-vertex box. Vertex order follows the annotation tuple order
/// (left-top, left-bottom, right-top, right-bottom); traversal order for
/// geometry is lt -> rt -> rb -> lb.
struct QuadBox {
  Point lt, lb, rt, rb;

  std::array<Point, 4> polygon() const { return {lt, rt, rb, lb}; }
  double signed_area() const;
  bool is_simple() const;
  bool is_finite() const;
  /// True when all vertices lie in [-margin, W + margin] x [-margin, H + margin].
  bool within(int width, int height, double margin) const;

  static QuadBox from_rect(double x0, double y0, double x1, double y1);
  bool operator==(const QuadBox&) const = default;
};

/// Axis-aligned integer pixel rectangle, half-open [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool operator==(const PixelRect&) const = default;
};

Image to_grayscale(const Image& img);

/// Pixel (x, y) has its center at integer coordinates (x, y). A pixel is set
/// when its center lies inside the quad or on its boundary.
BinaryMask rasterize_quad(const QuadBox& box, int width, int height);

/// Sets (ORs) the quad's pixels into an existing mask.
void fill_quad(const QuadBox& box, BinaryMask& mask);

/// Pixel rectangle holding every pixel center of the quad's bounding box, clipped to the image.
PixelRect quad_pixel_bounds(const QuadBox& box, int width, int height);

BinaryMask rect_mask(const PixelRect& rect, int width, int height);

/// Clamps every value into [kLogitEps, 1 - kLogitEps].
LogitMap clamp_logits(LogitMap values);

Plane gray_plane(const Image& img);

std::int64_t popcount(const BinaryMask& mask);

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.cols()) + "x" + std::to_string(a.rows()) + " vs " +
                            std::to_string(b.cols()) + "x" + std::to_string(b.rows()) + ")");
  }
}

void require_same_shape(const Image& a, const Image& b, const char* what);
void require_same_shape(const Image& a, const BinaryMask& m, const char* what);

}  // namespace glyphforge
