#include <filesystem>

#include <doctest.h>

#include "roadnet/errors.hpp"
#include "roadnet/geojson.hpp"

using namespace roadnet;

TEST_CASE("geojson round trip stitches shared endpoints") {
  RoadGraph g;
  const int a = g.add_node(GeoPoint{110.0, 33.0});
  const int b = g.add_node(GeoPoint{110.1, 33.0});
  const int c = g.add_node(GeoPoint{110.1, 33.1});
  g.add_edge(a, b, 3);
  g.add_edge(b, c, 7);

  const std::string text = road_graph_to_geojson(g);
  const RoadGraph back = road_graph_from_geojson(text);
  REQUIRE(back.nodes.size() == 3);
  REQUIRE(back.edges.size() == 2);
  CHECK(back.edges[0].cls == 3);
  CHECK(back.edges[1].cls == 7);
  CHECK(back.nodes[back.edges[0].a].lon == doctest::Approx(110.0).epsilon(1e-12));
}

TEST_CASE("geojson serialization is byte-stable") {
  RoadGraph g;
  const int a = g.add_node(GeoPoint{110.123456789, 33.987654321});
  const int b = g.add_node(GeoPoint{110.2, 33.9});
  g.add_edge(a, b);
  CHECK(road_graph_to_geojson(g) == road_graph_to_geojson(g));
}

TEST_CASE("geojson parse errors name the offending feature") {
  CHECK_THROWS_AS(road_graph_from_geojson("{not json"), DataError);
  CHECK_THROWS_WITH_AS(road_graph_from_geojson(R"({"type":"Feature"})"),
                       doctest::Contains("FeatureCollection"), DataError);

  const char* bad_geom = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"LineString",
     "coordinates":[[110.0,33.0],[110.1,33.0]]},"properties":{}},
    {"type":"Feature","geometry":{"type":"Point","coordinates":[1,2]},"properties":{}}
  ]})";
  CHECK_THROWS_WITH_AS(road_graph_from_geojson(bad_geom), doctest::Contains("feature 1"),
                       DataError);

  const char* repeated = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"LineString",
     "coordinates":[[110.0,33.0],[110.0,33.0]]},"properties":{}}
  ]})";
  CHECK_THROWS_WITH_AS(road_graph_from_geojson(repeated), doctest::Contains("feature 0"),
                       DataError);

  const char* bad_class = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"LineString",
     "coordinates":[[110.0,33.0],[110.1,33.0]]},"properties":{"class":11}}
  ]})";
  CHECK_THROWS_WITH_AS(road_graph_from_geojson(bad_class), doctest::Contains("class"), DataError);
}

TEST_CASE("multi-point linestrings split into segments") {
  const char* text = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"LineString",
     "coordinates":[[110.0,33.0],[110.1,33.0],[110.2,33.05]]},"properties":{}}
  ]})";
  const RoadGraph g = road_graph_from_geojson(text);
  CHECK(g.nodes.size() == 3);
  CHECK(g.edges.size() == 2);
}

TEST_CASE("empty feature collection reads as an empty graph") {
  const RoadGraph g = road_graph_from_geojson(R"({"type":"FeatureCollection","features":[]})");
  CHECK(g.empty());
}

TEST_CASE("missing file raises a data error") {
  CHECK_THROWS_AS(read_road_graph("/nonexistent/road.geojson"), DataError);
}
