#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "aw4re/error.hpp"

namespace aw4re {

// Row-major, channel-interleaved image buffer.
template <typename T, int Channels>
struct Image {
  static constexpr int kChannels = Channels;

  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{})
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * h * Channels, fill) {
    if (w < 0 || h < 0) throw InvalidArgument("negative image size");
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * Channels + c;
  }
  T& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool same_size(int w, int h) const { return width == w && height == h; }
  template <typename U, int C>
  bool same_size(const Image<U, C>& other) const {
    return same_size(other.width, other.height);
  }

  bool operator==(const Image&) const = default;
};

using RgbImage = Image<std::uint8_t, 3>;
using DepthImage = Image<float, 1>;
// 0/1 per pixel.
using MaskImage = Image<std::uint8_t, 1>;

// One camera observation. Synthetic capture fills every channel; imported
// data may omit depth and the dynamic mask.
struct Frame {
  RgbImage rgb;
  std::optional<DepthImage> depth;
  std::optional<MaskImage> dynamic_mask;

  int width() const { return rgb.width; }
  int height() const { return rgb.height; }
  bool has_depth() const { return depth.has_value(); }
  bool has_mask() const { return dynamic_mask.has_value(); }

  bool operator==(const Frame&) const = default;
};

inline std::size_t count_set(const MaskImage& mask) {
  std::size_t n = 0;
  for (auto v : mask.data) n += (v != 0);
  return n;
}

// 1 where depth is a valid hit (> 0).
inline MaskImage valid_depth_mask(const DepthImage& depth) {
  MaskImage mask(depth.width, depth.height, 0);
  for (std::size_t k = 0; k < depth.data.size(); ++k) {
    mask.data[k] = depth.data[k] > 0.0f ? 1 : 0;
  }
  return mask;
}

}  // namespace aw4re
