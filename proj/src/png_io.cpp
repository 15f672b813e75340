#include "aw4re/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "aw4re/error.hpp"

namespace aw4re {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error("cannot open " + path.string());
  return f;
}

// Writes rows of `row_bytes` each. Returns false on a libpng error.
bool write_rows(std::FILE* fp, int width, int height, int bit_depth,
                int color_type, const std::vector<png_bytep>& rows) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (rgb) after transforms
  std::vector<unsigned char> pixels;
};

// Decodes to 8-bit gray or RGB. Returns false on a libpng error.
bool read_png(std::FILE* fp, bool want_rgb, Decoded& out) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    // Keep raw sample values (0/1 for 1-bit masks) by skipping the expansion
    // scaling: png_set_packing unpacks without rescaling.
    png_set_packing(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  const bool is_gray = (color == PNG_COLOR_TYPE_GRAY ||
                        color == PNG_COLOR_TYPE_GRAY_ALPHA);
  if (want_rgb && is_gray) png_set_gray_to_rgb(png);
  if (!want_rgb && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.pixels.resize(row_bytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  if (image.width < 1 || image.height < 1) throw InvalidArgument("empty image");
  auto fp = open_file(path, "wb");
  std::vector<png_bytep> rows(image.height);
  auto* base = const_cast<std::uint8_t*>(image.data.data());
  for (int y = 0; y < image.height; ++y) {
    rows[y] = base + static_cast<std::size_t>(y) * image.width * 3;
  }
  if (!write_rows(fp.get(), image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                  rows)) {
    throw Error("PNG encode failed for " + path.string());
  }
}

void write_png_mask(const std::filesystem::path& path, const MaskImage& mask) {
  if (mask.width < 1 || mask.height < 1) throw InvalidArgument("empty mask");
  auto fp = open_file(path, "wb");
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.width) + 7) / 8;
  std::vector<unsigned char> packed(row_bytes * mask.height, 0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) {
        packed[row_bytes * y + x / 8] |= static_cast<unsigned char>(0x80 >> (x % 8));
      }
    }
  }
  std::vector<png_bytep> rows(mask.height);
  for (int y = 0; y < mask.height; ++y) rows[y] = packed.data() + row_bytes * y;
  if (!write_rows(fp.get(), mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY,
                  rows)) {
    throw Error("PNG encode failed for " + path.string());
  }
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  auto fp = open_file(path, "rb");
  Decoded d;
  if (!read_png(fp.get(), true, d) || d.channels != 3) {
    throw Error("cannot decode RGB PNG " + path.string());
  }
  RgbImage img(d.width, d.height);
  img.data.assign(d.pixels.begin(), d.pixels.end());
  return img;
}

MaskImage read_png_mask(const std::filesystem::path& path) {
  auto fp = open_file(path, "rb");
  Decoded d;
  if (!read_png(fp.get(), false, d) || d.channels != 1) {
    throw Error("cannot decode mask PNG " + path.string());
  }
  MaskImage mask(d.width, d.height);
  for (std::size_t k = 0; k < mask.data.size(); ++k) {
    mask.data[k] = d.pixels[k] != 0 ? 1 : 0;
  }
  return mask;
}

}  // namespace aw4re
