#pragma once

#include <filesystem>
#include <vector>

#include "glyphforge/core_types.hpp"

namespace glyphforge {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Reads PNG or JPEG (by signature). Gray inputs stay 1-channel; color
/// inputs (with or without alpha) become 3-channel RGB.
Image read_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& img);

/// Writes a {0,1} mask as an 8-bit PNG with values 0 and 255.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Writes raw 8-bit codes unchanged (used for provenance maps).
void write_code_png(const std::filesystem::path& path, const Raster<std::uint8_t>& codes);

/// Reads a 0/255 mask PNG back into {0,1}.
BinaryMask read_mask_png(const std::filesystem::path& path);

/// Sorted list of *.png / *.jpg / *.jpeg files in a directory.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace glyphforge
