#include "roadnet/geojson.hpp"

#include <fstream>
#include <map>
#include <utility>

#include <json.hpp>

#include "roadnet/errors.hpp"

namespace roadnet {

using nlohmann::json;

std::string road_graph_to_geojson(const RoadGraph& g) {
  json features = json::array();
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    json props{{"edge_id", i}};
    if (e.cls >= 1) props["class"] = e.cls;
    features.push_back(json{
        {"type", "Feature"},
        {"geometry",
         json{{"type", "LineString"},
              {"coordinates", json::array({json::array({g.nodes[e.a].lon, g.nodes[e.a].lat}),
                                           json::array({g.nodes[e.b].lon, g.nodes[e.b].lat})})}}},
        {"properties", props}});
  }
  json root{{"type", "FeatureCollection"}, {"features", features}};
  return root.dump(2) + "\n";
}

RoadGraph road_graph_from_geojson(const std::string& text, const std::string& source_name) {
  const std::string where = source_name.empty() ? "geojson" : source_name;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(where + ": " + e.what());
  }
  if (!root.is_object() || root.value("type", "") != "FeatureCollection" ||
      !root.contains("features") || !root["features"].is_array())
    throw DataError(where + ": not a FeatureCollection");

  RoadGraph g;
  std::map<std::pair<double, double>, int> node_of;
  auto node_id = [&](double lon, double lat) {
    auto it = node_of.find({lon, lat});
    if (it != node_of.end()) return it->second;
    const int id = g.add_node(GeoPoint{lon, lat});
    node_of.emplace(std::make_pair(lon, lat), id);
    return id;
  };

  const json& features = root["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    const std::string at = where + ": feature " + std::to_string(i);
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object())
      throw DataError(at + ": missing geometry");
    const json& geom = f["geometry"];
    if (geom.value("type", "") != "LineString")
      throw DataError(at + ": geometry type must be LineString");
    if (!geom.contains("coordinates") || !geom["coordinates"].is_array() ||
        geom["coordinates"].size() < 2)
      throw DataError(at + ": LineString needs at least 2 coordinates");
    int cls = 0;
    if (f.contains("properties") && f["properties"].is_object()) {
      const json& props = f["properties"];
      if (props.contains("class")) {
        if (!props["class"].is_number_integer())
          throw DataError(at + ": class property must be an integer");
        cls = props["class"].get<int>();
        if (cls < 1 || cls > 10) throw DataError(at + ": class must be in 1..10");
      }
    }
    // multi-point LineStrings are accepted and split into segments
    int prev = -1;
    for (const json& coord : geom["coordinates"]) {
      if (!coord.is_array() || coord.size() < 2 || !coord[0].is_number() || !coord[1].is_number())
        throw DataError(at + ": coordinate must be [lon, lat]");
      const int cur = node_id(coord[0].get<double>(), coord[1].get<double>());
      if (prev >= 0) {
        if (prev == cur) throw DataError(at + ": zero-length segment (repeated point)");
        g.add_edge(prev, cur, cls);
      }
      prev = cur;
    }
  }
  return g;
}

void write_road_graph(const std::filesystem::path& file, const RoadGraph& g) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  out << road_graph_to_geojson(g);
}

RoadGraph read_road_graph(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError(file.string() + ": cannot open");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return road_graph_from_geojson(text, file.filename().string());
}

}  // namespace roadnet
