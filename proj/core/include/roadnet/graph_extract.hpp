#ifndef ROADNET_GRAPH_EXTRACT_HPP
#define ROADNET_GRAPH_EXTRACT_HPP

#include <utility>
#include <vector>

#include "roadnet/raster.hpp"
#include "roadnet/road_graph.hpp"

namespace roadnet {

struct ExtractParams {
  int node_interval = 50;  // pixels of walked path between planted nodes
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

// Number of distinct skeleton branches leaving a foreground pixel:
// runs of consecutive foreground cells on the 8-neighborhood ring.
// Throws on background pixels.
int fringe_count(const BitCanvas& canvas, PixelCoord px);

// Foreground pixels with fringe count 1 (endpoint) or > 2 (junction),
// in row-major order.
std::vector<PixelCoord> detect_crossings(const BitCanvas& canvas);

// Combustion: walk the skeleton between crossing pixels, plant nodes every
// node_interval pixels of path, georeference through pixel centers, and
// connect consecutive nodes. Crossing-free cycles get two antipodal seed
// anchors. The result has no self-loops and no duplicate edges.
RoadGraph extract_graph(const BitCanvas& canvas, const ExtractParams& p,
                        int tile_size = kDefaultTileSize);

}  // namespace roadnet

#endif
