#pragma once

#include "glyphforge/core_types.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge {

/// Weak view: horizontal flip + scale jitter. Strong view: the weak view
/// followed by brightness/contrast jitter, optional grayscale and Gaussian blur.
struct AugmentationSpec {
  double flip_prob = 0.5;
  double scale_min = 0.9;
  double scale_max = 1.1;
  double brightness = 0.25;
  double contrast = 0.25;
  double blur_sigma_max = 1.5;
  double grayscale_prob = 0.2;

  void validate() const;
};

/// Scale about the image center, then optional mirror in x. Image size is kept.
struct GeometricTransform {
  bool flip = false;
  double scale = 1.0;

  Point apply(const Point& p, int width, int height) const;
  /// Source position sampled by output pixel q.
  Point inverse(const Point& q, int width, int height) const;
};

struct PhotometricTransform {
  double brightness = 1.0;  // multiplicative
  double contrast = 1.0;    // around the image mean
  bool grayscale = false;
  double blur_sigma = 0.0;
};

GeometricTransform sample_geometric(const AugmentationSpec& spec, Rng& rng);
PhotometricTransform sample_photometric(const AugmentationSpec& spec, Rng& rng);

/// Bilinear resampling with clamp-to-edge.
Image warp_image(const Image& img, const GeometricTransform& t);
/// Nearest-neighbour resampling; samples falling outside the image are 0.
BinaryMask warp_mask(const BinaryMask& mask, const GeometricTransform& t);
QuadBox warp_box(const QuadBox& box, const GeometricTransform& t, int width, int height);

Image apply_photometric(const Image& img, const PhotometricTransform& t);

Image gaussian_blur(const Image& img, double sigma);

/// Bilinear resize to an explicit size.
Image resize_image(const Image& img, int width, int height);

}  // namespace glyphforge
