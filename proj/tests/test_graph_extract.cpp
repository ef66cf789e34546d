#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include <doctest.h>

#include "roadnet/errors.hpp"
#include "roadnet/graph_extract.hpp"
#include "roadnet/morphology.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace roadnet;

namespace {

// planting arithmetic for one branch of m path steps
int interior_nodes(int m, int interval) { return m >= 1 ? (m - 1) / interval : 0; }

int junction_count(const RoadGraph& g, int k) {
  const auto deg = node_degrees(g);
  return static_cast<int>(std::count_if(deg.begin(), deg.end(), [&](int d) { return d >= k; }));
}

int graph_components(const RoadGraph& g) {
  std::vector<int> parent(g.nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : g.edges) parent[find(e.a)] = find(e.b);
  std::set<int> roots;
  for (std::size_t i = 0; i < parent.size(); ++i) roots.insert(find(static_cast<int>(i)));
  return static_cast<int>(roots.size());
}

}  // namespace

TEST_CASE("fringe_count on canonical pixels") {
  const BitCanvas line = synthetic::line_skeleton(10);
  CHECK(fringe_count(line, {8, 5}) == 2);   // interior
  CHECK(fringe_count(line, {4, 5}) == 1);   // endpoint
  CHECK(fringe_count(line, {13, 5}) == 1);  // other endpoint

  const BitCanvas plus = synthetic::plus_skeleton(5);
  const int mid = 15;
  CHECK(fringe_count(plus, {mid, mid}) == 4);
  CHECK_THROWS_AS(fringe_count(plus, {0, 0}), InvariantError);
}

TEST_CASE("detect_crossings finds endpoints and junctions") {
  const BitCanvas line = synthetic::line_skeleton(10);
  const auto ends = detect_crossings(line);
  REQUIRE(ends.size() == 2);
  CHECK(ends[0] == PixelCoord{4, 5});
  CHECK(ends[1] == PixelCoord{13, 5});

  const BitCanvas plus = synthetic::plus_skeleton(5);
  CHECK(detect_crossings(plus).size() == 5);  // 4 tips + center

  CHECK(detect_crossings(BitCanvas::zeros(TileCoord{0, 0, 0}, 10, 10)).empty());
}

TEST_CASE("extract_graph on an empty skeleton") {
  const RoadGraph g =
      extract_graph(BitCanvas::zeros(TileCoord{0, 0, 0}, 16, 16), ExtractParams{50});
  CHECK(g.nodes.empty());
  CHECK(g.edges.empty());
}

TEST_CASE("extract_graph plants nodes along a line at the interval") {
  // 100 px line = 99 walk steps; interval 25 plants offsets 0,25,50,75,99
  const BitCanvas line = synthetic::line_skeleton(100);
  const RoadGraph g = extract_graph(line, ExtractParams{25});
  CHECK(g.nodes.size() == 5);
  CHECK(g.edges.size() == 4);
  validate_graph(g);
}

TEST_CASE("extract_graph on a plus keeps only crossing nodes at wide intervals") {
  const BitCanvas plus = synthetic::plus_skeleton(30);
  const RoadGraph g = extract_graph(plus, ExtractParams{50});
  CHECK(g.nodes.size() == 5);
  CHECK(g.edges.size() == 4);
  validate_graph(g);
  CHECK(junction_count(g, 3) == 1);
}

TEST_CASE("extract_graph closed-form counts for the H shape") {
  const BitCanvas h = synthetic::h_skeleton();
  // segments (in walk steps): 4 vertical halves of 30, crossbar of 50
  for (int interval : {50, 20}) {
    const RoadGraph g = extract_graph(h, ExtractParams{interval});
    const int interior =
        4 * interior_nodes(30, interval) + interior_nodes(50, interval);
    CHECK(g.nodes.size() == static_cast<std::size_t>(6 + interior));
    CHECK(g.edges.size() == static_cast<std::size_t>(5 + interior));
    validate_graph(g);
    CHECK(junction_count(g, 3) == 2);
  }
}

TEST_CASE("extract_graph closed-form counts for the 3x3 grid") {
  const BitCanvas grid = synthetic::grid_skeleton();
  // per line: tip-10-junction, 30, 30, junction-10-tip; 6 lines
  const int interval = 25;
  const RoadGraph g = extract_graph(grid, ExtractParams{interval});
  const int per_line = 2 * interior_nodes(10, interval) + 2 * interior_nodes(30, interval);
  const int interior = 6 * per_line;
  const int crossings = 9 + 12;  // junctions + tips
  const int segments = 24;
  CHECK(g.nodes.size() == static_cast<std::size_t>(crossings + interior));
  CHECK(g.edges.size() == static_cast<std::size_t>(segments + interior));
  validate_graph(g);
  CHECK(junction_count(g, 3) == 9);
}

TEST_CASE("extract_graph handles a crossing-free ring without self-loops") {
  const BitCanvas ring = synthetic::ring_skeleton(12);
  const RoadGraph g = extract_graph(ring, ExtractParams{1000});
  CHECK(g.edges.size() >= 2);
  validate_graph(g);  // no self-loops, no duplicate pairs
  // the ring comes back as a single closed chain
  const auto deg = node_degrees(g);
  for (int d : deg) CHECK(d == 2);
}

TEST_CASE("extract_graph keeps skeleton connectivity, no self-loops or duplicates") {
  std::mt19937_64 rng(505);
  for (int it = 0; it < 20; ++it) {
    BitCanvas c = oracles::random_blobs(rng, 56);
    c = refine(skeletonize(close(c, MorphParams{3, 1})), MorphParams{3, 4});
    const RoadGraph g = extract_graph(c, ExtractParams{10});
    validate_graph(g);
    // the graph is connected exactly where the skeleton is
    CHECK(graph_components(g) == oracles::count_components(c, true));
  }
}

TEST_CASE("total_length_km haversine checks") {
  RoadGraph g;
  CHECK(total_length_km(g) == 0.0);

  const int a = g.add_node(GeoPoint{0.0, 0.0});
  const int b = g.add_node(GeoPoint{0.0, 1.0});
  g.add_edge(a, b);
  CHECK(total_length_km(g) == doctest::Approx(111.195).epsilon(1e-4));

  const int c = g.add_node(GeoPoint{1.0, 1.0});
  g.add_edge(b, c);
  const double two_leg = haversine_km(g.nodes[a], g.nodes[b]) + haversine_km(g.nodes[b], g.nodes[c]);
  CHECK(total_length_km(g) == doctest::Approx(two_leg).epsilon(1e-12));
}

TEST_CASE("total_length_km invariant under relabeling and edge order") {
  std::mt19937_64 rng(606);
  const RoadGraph g = synthetic::random_road_graph(rng);
  RoadGraph permuted;
  std::vector<int> perm(g.nodes.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::shuffle(perm.begin(), perm.end(), rng);
  permuted.nodes.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) permuted.nodes[perm[i]] = g.nodes[i];
  for (const auto& e : g.edges) permuted.add_edge(perm[e.a], perm[e.b], e.cls);
  std::reverse(permuted.edges.begin(), permuted.edges.end());
  CHECK(total_length_km(permuted) == doctest::Approx(total_length_km(g)).epsilon(1e-12));
}

TEST_CASE("road_density and its argument check") {
  RoadGraph g;
  CHECK(road_density(g, 50.0) == 0.0);
  const int a = g.add_node(GeoPoint{0.0, 0.0});
  const int b = g.add_node(GeoPoint{0.0, 1.0});
  g.add_edge(a, b);
  const double len = total_length_km(g);
  CHECK(road_density(g, len / 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(road_density(g, 0.0), InvariantError);
  CHECK_THROWS_AS(road_density(g, -1.0), InvariantError);
}

TEST_CASE("simplify collapses a path to one edge") {
  RoadGraph g;
  for (int i = 0; i < 5; ++i) g.add_node(GeoPoint{static_cast<double>(i), 0.0});
  for (int i = 0; i + 1 < 5; ++i) g.add_edge(i, i + 1);
  const RoadGraph s = simplify_to_segments(g);
  CHECK(s.nodes.size() == 2);
  CHECK(s.edges.size() == 1);
}

TEST_CASE("simplify keeps junction structure of a plus") {
  RoadGraph g;
  const int c = g.add_node(GeoPoint{0, 0});
  for (int i = 0; i < 4; ++i) {
    const int tip = g.add_node(GeoPoint{std::cos(i * 1.57), std::sin(i * 1.57)});
    const int mid = g.add_node(GeoPoint{0.5 * std::cos(i * 1.57), 0.5 * std::sin(i * 1.57)});
    g.add_edge(c, mid);
    g.add_edge(mid, tip);
  }
  const RoadGraph s = simplify_to_segments(g);
  CHECK(s.nodes.size() == 5);
  CHECK(s.edges.size() == 4);
  CHECK(junction_count(s, 3) == 1);
}

TEST_CASE("simplify turns a pure cycle into two antipodal-anchor edges") {
  RoadGraph g;
  const int n = 8;
  for (int i = 0; i < n; ++i)
    g.add_node(GeoPoint{std::cos(i * 0.785), std::sin(i * 0.785)});
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  const RoadGraph s = simplify_to_segments(g);
  CHECK(s.nodes.size() == 2);
  CHECK(s.edges.size() == 2);
  CHECK(s.edges[0].a != s.edges[0].b);
}

TEST_CASE("simplify preserves component count and the non-chain degree sequence") {
  std::mt19937_64 rng(707);
  for (int it = 0; it < 15; ++it) {
    const RoadGraph g = synthetic::random_road_graph(rng);
    const RoadGraph s = simplify_to_segments(g);
    std::multiset<int> before, after;
    for (int d : node_degrees(g))
      if (d != 2) before.insert(d);
    for (int d : node_degrees(s))
      if (d != 2) after.insert(d);
    CHECK(before == after);
    CHECK(graph_components(s) == graph_components(g));
  }
}
