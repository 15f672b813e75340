#pragma once

#include <filesystem>

#include "aw4re/image.hpp"

namespace aw4re {

// 8-bit RGB PNG. Reading converts gray/palette/alpha sources to RGB.
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png_rgb(const std::filesystem::path& path);

// 1-bit grayscale PNG; any nonzero mask value is written as 1. Reading maps
// nonzero samples of any gray depth to 1.
void write_png_mask(const std::filesystem::path& path, const MaskImage& mask);
MaskImage read_png_mask(const std::filesystem::path& path);

}  // namespace aw4re
