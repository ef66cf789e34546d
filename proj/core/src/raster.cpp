#include "roadnet/raster.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "roadnet/errors.hpp"

namespace roadnet {

bool TileCoord::valid() const {
  if (z < 0 || z > 30) return false;
  const long long n = 1LL << z;
  return x >= 0 && x < n && y >= 0 && y < n;
}

TileImage TileImage::filled(TileCoord c, int w, int h, std::uint8_t r, std::uint8_t g,
                            std::uint8_t b) {
  TileImage img;
  img.coord = c;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

void TileImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::size_t i = static_cast<std::size_t>(y * width + x) * 3;
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

BitCanvas BitCanvas::zeros(TileCoord origin, int w, int h) {
  BitCanvas c;
  c.origin = origin;
  c.width = w;
  c.height = h;
  c.bits.assign(static_cast<std::size_t>(w) * h, 0);
  return c;
}

std::size_t BitCanvas::count_ones() const {
  std::size_t n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

GeoPoint pixel_to_geo(const BitCanvas& canvas, double px, double py, int tile_size) {
  if (px < 0.0 || px > canvas.width || py < 0.0 || py > canvas.height) {
    throw InvariantError("pixel_to_geo: pixel (" + std::to_string(px) + "," + std::to_string(py) +
                         ") outside canvas " + std::to_string(canvas.width) + "x" +
                         std::to_string(canvas.height));
  }
  const double n = static_cast<double>(1LL << canvas.origin.z) * tile_size;
  const double gx = static_cast<double>(canvas.origin.x) * tile_size + px;
  const double gy = static_cast<double>(canvas.origin.y) * tile_size + py;
  GeoPoint p;
  p.lon = gx / n * 360.0 - 180.0;
  p.lat = std::atan(std::sinh(std::numbers::pi * (1.0 - 2.0 * gy / n))) * 180.0 / std::numbers::pi;
  return p;
}

void geo_to_pixel(const BitCanvas& canvas, const GeoPoint& p, double& px, double& py,
                  int tile_size) {
  const double n = static_cast<double>(1LL << canvas.origin.z) * tile_size;
  const double lat_rad = p.lat * std::numbers::pi / 180.0;
  const double gx = (p.lon + 180.0) / 360.0 * n;
  const double gy = (1.0 - std::asinh(std::tan(lat_rad)) / std::numbers::pi) / 2.0 * n;
  px = gx - static_cast<double>(canvas.origin.x) * tile_size;
  py = gy - static_cast<double>(canvas.origin.y) * tile_size;
}

BitCanvas mosaic(std::span<const MaskTile> tiles, const TileRect& bbox, int tile_size) {
  if (bbox.w <= 0 || bbox.h <= 0) throw InvariantError("mosaic: empty bbox");
  BitCanvas canvas = BitCanvas::zeros(TileCoord{bbox.x, bbox.y, bbox.z}, bbox.w * tile_size,
                                      bbox.h * tile_size);
  for (const MaskTile& t : tiles) {
    if (t.coord.z != bbox.z) {
      throw InvariantError("mosaic: tile zoom " + std::to_string(t.coord.z) +
                           " differs from bbox zoom " + std::to_string(bbox.z));
    }
    if (!bbox.contains(t.coord)) {
      throw InvariantError("mosaic: tile (" + std::to_string(t.coord.x) + "," +
                           std::to_string(t.coord.y) + ") outside bbox");
    }
    if (t.bits.size() != static_cast<std::size_t>(tile_size) * tile_size) {
      throw InvariantError("mosaic: tile bit array size mismatch");
    }
    const int ox = (t.coord.x - bbox.x) * tile_size;
    const int oy = (t.coord.y - bbox.y) * tile_size;
    for (int y = 0; y < tile_size; ++y) {
      const std::uint8_t* src = t.bits.data() + static_cast<std::size_t>(y) * tile_size;
      std::uint8_t* dst = canvas.bits.data() + static_cast<std::size_t>(oy + y) * canvas.width + ox;
      for (int x = 0; x < tile_size; ++x) dst[x] = src[x] ? 1 : 0;
    }
  }
  return canvas;
}

MaskTile crop_tile(const BitCanvas& canvas, const TileCoord& coord, int tile_size) {
  if (coord.z != canvas.origin.z) throw InvariantError("crop_tile: zoom mismatch");
  const int ox = (coord.x - canvas.origin.x) * tile_size;
  const int oy = (coord.y - canvas.origin.y) * tile_size;
  if (ox < 0 || oy < 0 || ox + tile_size > canvas.width || oy + tile_size > canvas.height) {
    throw InvariantError("crop_tile: tile slot outside canvas");
  }
  MaskTile t;
  t.coord = coord;
  t.bits.resize(static_cast<std::size_t>(tile_size) * tile_size);
  for (int y = 0; y < tile_size; ++y) {
    const std::uint8_t* src = canvas.bits.data() + static_cast<std::size_t>(oy + y) * canvas.width + ox;
    std::copy(src, src + tile_size, t.bits.data() + static_cast<std::size_t>(y) * tile_size);
  }
  return t;
}

}  // namespace roadnet
