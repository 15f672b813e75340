#pragma once

#include <limits>

#include "aw4re/image.hpp"

namespace aw4re {

using FloatImage3 = Image<float, 3>;
using FloatImage1 = Image<float, 1>;

// Pull-push scattered-data fill. `values` is read only where `support` is
// set. The pyramid has at most `levels` downsamplings (negative: until 1x1).
// Returns the filled values; `filled` receives 1 for every pixel that got a
// value (supported pixels keep theirs unchanged).
template <int C>
Image<float, C> pull_push(const Image<float, C>& values, const MaskImage& support,
                          int levels, MaskImage& filled);

FloatImage3 to_float(const RgbImage& image);
// Rounds to nearest and clamps to [0, 255].
std::uint8_t to_byte(float v);

// Squared Euclidean distance (pixels) from each pixel to the nearest set
// pixel of `mask`; +inf when the mask is empty.
Image<double, 1> squared_distance_to_set(const MaskImage& mask);

}  // namespace aw4re
