#ifndef ROADNET_GEOJSON_HPP
#define ROADNET_GEOJSON_HPP

#include <filesystem>
#include <string>

#include "roadnet/road_graph.hpp"

namespace roadnet {

// FeatureCollection of two-point LineStrings, properties {edge_id, class?}.
// Nodes are implicit; shared endpoints are stitched back together on read
// by exact coordinate equality.
std::string road_graph_to_geojson(const RoadGraph& g);
RoadGraph road_graph_from_geojson(const std::string& text, const std::string& source_name = "");

void write_road_graph(const std::filesystem::path& file, const RoadGraph& g);
RoadGraph read_road_graph(const std::filesystem::path& file);

}  // namespace roadnet

#endif
