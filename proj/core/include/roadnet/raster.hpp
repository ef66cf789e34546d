#ifndef ROADNET_RASTER_HPP
#define ROADNET_RASTER_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace roadnet {

inline constexpr int kDefaultTileSize = 256;

// Slippy-map tile address. Valid iff 0 <= x,y < 2^z.
struct TileCoord {
  int x = 0;
  int y = 0;
  int z = 0;

  bool valid() const;
  friend bool operator==(const TileCoord&, const TileCoord&) = default;
};

// 8-bit RGB raster for one tile, interleaved row-major.
struct TileImage {
  TileCoord coord;
  int width = kDefaultTileSize;
  int height = kDefaultTileSize;
  std::vector<std::uint8_t> rgb;  // width*height*3

  static TileImage filled(TileCoord c, int w, int h, std::uint8_t r, std::uint8_t g,
                          std::uint8_t b);
  std::uint8_t at(int x, int y, int channel) const {
    return rgb[static_cast<std::size_t>(y * width + x) * 3 + channel];
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

// Longitude/latitude in degrees, Web-Mercator latitude range.
struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

inline constexpr double kWebMercatorMaxLat = 85.05112877980659;

// Binary raster (mask or skeleton) anchored at the tile grid.
// origin is the tile coordinate of the top-left tile; all georeferencing
// derives from it. Cells hold 0 or 1.
struct BitCanvas {
  TileCoord origin;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  static BitCanvas zeros(TileCoord origin, int w, int h);

  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v) { bits[static_cast<std::size_t>(y) * width + x] = v; }
  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::size_t count_ones() const;
};

// Rectangle of tiles at one zoom level: x..x+w-1, y..y+h-1.
struct TileRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  int z = 0;

  bool contains(const TileCoord& c) const {
    return c.z == z && c.x >= x && c.x < x + w && c.y >= y && c.y < y + h;
  }
};

// One tile worth of binarized mask bits.
struct MaskTile {
  TileCoord coord;
  std::vector<std::uint8_t> bits;  // tile_size*tile_size
};

// Inverse Web-Mercator at the canvas zoom. px/py are continuous pixel
// coordinates within the canvas: integer values address pixel corners,
// +0.5 the pixel centers. Throws on coordinates outside [0,W]x[0,H].
GeoPoint pixel_to_geo(const BitCanvas& canvas, double px, double py, int tile_size = kDefaultTileSize);

// Forward projection back to continuous canvas pixel coordinates.
void geo_to_pixel(const BitCanvas& canvas, const GeoPoint& p, double& px, double& py,
                  int tile_size = kDefaultTileSize);

// Assemble per-tile masks into one county canvas. Missing slots stay 0.
// All tiles must match bbox.z and lie inside bbox.
BitCanvas mosaic(std::span<const MaskTile> tiles, const TileRect& bbox,
                 int tile_size = kDefaultTileSize);

// Cut one tile slot back out of a mosaicked canvas.
MaskTile crop_tile(const BitCanvas& canvas, const TileCoord& coord,
                   int tile_size = kDefaultTileSize);

}  // namespace roadnet

#endif
