#ifndef ROADNET_ROAD_GRAPH_HPP
#define ROADNET_ROAD_GRAPH_HPP

#include <vector>

#include "roadnet/raster.hpp"

namespace roadnet {

// Undirected georeferenced graph of straight segments. Node ids are
// indices into nodes. cls = 0 means unclassed, 1..10 are road classes
// from highest (highway) to lowest (pathway).
struct RoadGraph {
  struct Edge {
    int a = 0;
    int b = 0;
    int cls = 0;
  };

  std::vector<GeoPoint> nodes;
  std::vector<Edge> edges;

  int add_node(GeoPoint p) {
    nodes.push_back(p);
    return static_cast<int>(nodes.size()) - 1;
  }
  void add_edge(int a, int b, int cls = 0) { edges.push_back({a, b, cls}); }
  bool empty() const { return nodes.empty() && edges.empty(); }
};

// Node degrees (parallel edges each count).
std::vector<int> node_degrees(const RoadGraph& g);

// Structural checks: endpoints in range, no self-loops, no duplicate
// unordered pairs. Throws InvariantError naming the first offender.
// Simplified cycles intentionally carry one antipodal double edge, so
// pass allow_parallel_edges=true when validating simplify output.
void validate_graph(const RoadGraph& g, bool allow_parallel_edges = false);

// Collapses every chain of degree-2 nodes into a single straight edge
// between its terminal (degree != 2) nodes. Pure cycles keep two
// antipodal anchor nodes and become a pair of edges. Edge class labels
// survive from the first chain segment.
RoadGraph simplify_to_segments(const RoadGraph& g);

// Great-circle distance, mean Earth radius 6371.0088 km.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

double total_length_km(const RoadGraph& g);

// km of road per km^2; area must be positive.
double road_density(const RoadGraph& g, double area_km2);

}  // namespace roadnet

#endif
