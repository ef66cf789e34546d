#include "roadnet/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "roadnet/errors.hpp"

namespace roadnet {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& file, const char* what) {
  throw DataError(file.string() + ": " + what);
}

// Decodes to 8-bit, either RGB (want_rgb) or gray.
std::vector<std::uint8_t> read_png(const std::filesystem::path& file, bool want_rgb, int& w,
                                   int& h) {
  FilePtr fp(std::fopen(file.string().c_str(), "rb"));
  if (!fp) fail(file, "cannot open");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(file, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(file, "png_create_info_struct failed");
  }
  std::vector<std::uint8_t> data;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(file, "not a valid PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (want_rgb) {
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
  } else {
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
      png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  w = static_cast<int>(png_get_image_width(png, info));
  h = static_cast<int>(png_get_image_height(png, info));
  const int channels = want_rgb ? 3 : 1;
  data.resize(static_cast<std::size_t>(w) * h * channels);
  rows.resize(h);
  for (int y = 0; y < h; ++y)
    rows[y] = data.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return data;
}

void write_png(const std::filesystem::path& file, const std::uint8_t* data, int w, int h,
               bool rgb) {
  std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path());
  FilePtr fp(std::fopen(file.string().c_str(), "wb"));
  if (!fp) fail(file, "cannot open for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(file, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(file, "png_create_info_struct failed");
  }
  std::vector<png_bytep> rows(h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(file, "PNG write failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8, rgb ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = rgb ? 3 : 1;
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * w * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

TileImage read_tile_png(const std::filesystem::path& file, TileCoord coord) {
  TileImage img;
  img.coord = coord;
  img.rgb = read_png(file, /*want_rgb=*/true, img.width, img.height);
  if (img.width <= 0 || img.height <= 0) fail(file, "empty image");
  return img;
}

void write_tile_png(const std::filesystem::path& file, const TileImage& img) {
  write_png(file, img.rgb.data(), img.width, img.height, /*rgb=*/true);
}

void write_canvas_png(const std::filesystem::path& file, const BitCanvas& canvas) {
  std::vector<std::uint8_t> gray(canvas.bits.size());
  for (std::size_t i = 0; i < canvas.bits.size(); ++i) gray[i] = canvas.bits[i] ? 255 : 0;
  write_png(file, gray.data(), canvas.width, canvas.height, /*rgb=*/false);
}

BitCanvas read_canvas_png(const std::filesystem::path& file, TileCoord origin) {
  BitCanvas canvas;
  canvas.origin = origin;
  std::vector<std::uint8_t> gray = read_png(file, /*want_rgb=*/false, canvas.width, canvas.height);
  canvas.bits.resize(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) canvas.bits[i] = gray[i] >= 128 ? 1 : 0;
  return canvas;
}

}  // namespace roadnet
