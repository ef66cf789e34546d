#include "roadnet/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>

#include "roadnet/errors.hpp"

namespace roadnet {

std::vector<int> node_degrees(const RoadGraph& g) {
  std::vector<int> deg(g.nodes.size(), 0);
  for (const auto& e : g.edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  return deg;
}

void validate_graph(const RoadGraph& g, bool allow_parallel_edges) {
  const int n = static_cast<int>(g.nodes.size());
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
      throw InvariantError("graph: edge " + std::to_string(i) + " references missing node");
    if (e.a == e.b)
      throw InvariantError("graph: edge " + std::to_string(i) + " is a self-loop");
    const auto key = std::minmax(e.a, e.b);
    if (!seen.insert(key).second && !allow_parallel_edges)
      throw InvariantError("graph: duplicate edge " + std::to_string(key.first) + "-" +
                           std::to_string(key.second));
  }
}

namespace {

struct Adjacency {
  // per node: (neighbor, edge index)
  std::vector<std::vector<std::pair<int, int>>> nbr;
};

Adjacency build_adjacency(const RoadGraph& g) {
  Adjacency adj;
  adj.nbr.resize(g.nodes.size());
  for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
    adj.nbr[g.edges[i].a].push_back({g.edges[i].b, i});
    adj.nbr[g.edges[i].b].push_back({g.edges[i].a, i});
  }
  return adj;
}

}  // namespace

RoadGraph simplify_to_segments(const RoadGraph& g) {
  const Adjacency adj = build_adjacency(g);
  const std::vector<int> deg = node_degrees(g);
  const int n = static_cast<int>(g.nodes.size());

  RoadGraph out;
  std::vector<int> remap(n, -1);
  auto keep_node = [&](int v) {
    if (remap[v] < 0) remap[v] = out.add_node(g.nodes[v]);
    return remap[v];
  };

  std::vector<char> edge_done(g.edges.size(), 0);
  std::set<std::pair<int, int>> emitted;

  // Walks a degree-2 chain starting with edge `ei` out of terminal `start`;
  // returns the chain's node sequence start..terminal.
  auto walk_chain = [&](int start, int ei) {
    std::vector<int> path{start};
    int cur = g.edges[ei].a == start ? g.edges[ei].b : g.edges[ei].a;
    int via = ei;
    edge_done[ei] = 1;
    while (deg[cur] == 2 && cur != start) {
      path.push_back(cur);
      const auto& nb = adj.nbr[cur];
      const int next_edge = nb[0].second == via ? nb[1].second : nb[0].second;
      edge_done[next_edge] = 1;
      cur = g.edges[next_edge].a == cur ? g.edges[next_edge].b : g.edges[next_edge].a;
      via = next_edge;
    }
    path.push_back(cur);
    return path;
  };

  // Chain midpoints get kept when a collapsed chain would duplicate an
  // existing pair or form a self-loop.
  auto emit_chain = [&](const std::vector<int>& path, int cls) {
    const int u = path.front(), v = path.back();
    const bool loop = u == v;
    const bool dup = emitted.count(std::minmax(keep_node(u), keep_node(v))) > 0;
    std::vector<int> anchors{u};
    if (loop) {
      // u -> a -> b -> u needs two interior anchors to stay loop-free
      anchors.push_back(path[path.size() / 3 > 0 ? path.size() / 3 : 1]);
      anchors.push_back(path[2 * path.size() / 3]);
    } else if (dup) {
      anchors.push_back(path[path.size() / 2]);
    }
    anchors.push_back(v);
    for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
      const int a = keep_node(anchors[i]), b = keep_node(anchors[i + 1]);
      emitted.insert(std::minmax(a, b));
      out.add_edge(a, b, cls);
    }
  };

  // Two-node paths (original terminal-terminal edges) cannot take a
  // midpoint anchor, so they go first; any parallel chain subdivides.
  std::vector<std::pair<std::vector<int>, int>> chains;
  for (int v = 0; v < n; ++v) {
    if (deg[v] == 2) continue;
    keep_node(v);
    for (const auto& [nb, ei] : adj.nbr[v]) {
      (void)nb;
      if (edge_done[ei]) continue;
      chains.push_back({walk_chain(v, ei), g.edges[ei].cls});
    }
  }
  std::stable_sort(chains.begin(), chains.end(), [](const auto& a, const auto& b) {
    return (a.first.size() == 2) > (b.first.size() == 2);
  });
  for (const auto& [path, cls] : chains) emit_chain(path, cls);

  // Components that are pure degree-2 cycles: two antipodal anchors,
  // two edges between them.
  for (int v = 0; v < n; ++v) {
    if (deg[v] != 2 || remap[v] >= 0) continue;
    bool touched = false;
    for (const auto& [nb, ei] : adj.nbr[v]) {
      (void)nb;
      if (edge_done[ei]) touched = true;
    }
    if (touched) continue;
    const std::vector<int> cycle = walk_chain(v, adj.nbr[v][0].second);
    // cycle = v ... v; pick the antipodal interior node
    const int half = static_cast<int>((cycle.size() - 1) / 2);
    const int a = keep_node(v), b = keep_node(cycle[half]);
    const int cls = g.edges[adj.nbr[v][0].second].cls;
    out.add_edge(a, b, cls);
    out.add_edge(a, b, cls);
  }

  // Isolated nodes vanish; nothing references them.
  return out;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kEarthRadiusKm = 6371.0088;
  const double to_rad = std::numbers::pi / 180.0;
  const double phi1 = a.lat * to_rad, phi2 = b.lat * to_rad;
  const double dphi = (b.lat - a.lat) * to_rad;
  const double dlam = (b.lon - a.lon) * to_rad;
  const double s = std::sin(dphi / 2.0), t = std::sin(dlam / 2.0);
  const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double total_length_km(const RoadGraph& g) {
  double sum = 0.0;
  for (const auto& e : g.edges) sum += haversine_km(g.nodes[e.a], g.nodes[e.b]);
  return sum;
}

double road_density(const RoadGraph& g, double area_km2) {
  if (!(area_km2 > 0.0)) throw InvariantError("road_density: area must be positive");
  return total_length_km(g) / area_km2;
}

}  // namespace roadnet
