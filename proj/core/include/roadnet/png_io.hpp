#ifndef ROADNET_PNG_IO_HPP
#define ROADNET_PNG_IO_HPP

#include <filesystem>

#include "roadnet/raster.hpp"

namespace roadnet {

// Reads any 8/16-bit PNG (gray, palette, RGB, RGBA) as 8-bit RGB.
// coord is attached by the caller; throws DataError on bad files.
TileImage read_tile_png(const std::filesystem::path& file, TileCoord coord);

void write_tile_png(const std::filesystem::path& file, const TileImage& img);

// Binary canvases travel as 8-bit grayscale PNG: 0 <-> 0, 1 <-> 255.
// Reading binarizes at 128 so hand-made masks with other values still load.
void write_canvas_png(const std::filesystem::path& file, const BitCanvas& canvas);
BitCanvas read_canvas_png(const std::filesystem::path& file, TileCoord origin);

}  // namespace roadnet

#endif
