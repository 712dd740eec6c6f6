#pragma once

#include <filesystem>

#include "specknet/image.hpp"

namespace specknet {

/// Reads an 8-bit single-channel PNG or TIFF as a PixelU8Range plane.
/// Throws DataError for unreadable files, colour images and other bit depths.
ImagePlane read_image(const std::filesystem::path& path);

/// Writes PNG or TIFF (by extension). Samples are clamped to [0, 255] and
/// rounded half-to-even; the domain tag is not stored in the pixels.
void write_image(const ImagePlane& img, const std::filesystem::path& path);

}  // namespace specknet
