#include "roadnet/graph_eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "roadnet/errors.hpp"

namespace roadnet {
namespace {

inline double euclid(double ax, double ay, double bx, double by) {
  const double dx = ax - bx, dy = ay - by;
  return std::sqrt(dx * dx + dy * dy);
}

inline double point_dist(const SamplePoint& a, const SamplePoint& b, bool haversine) {
  if (haversine) return haversine_km(GeoPoint{a.x, a.y}, GeoPoint{b.x, b.y});
  return euclid(a.x, a.y, b.x, b.y);
}

// Coarse grid over H so candidate generation stays near-linear.
struct Grid {
  double cell = 1.0;
  std::map<std::pair<long long, long long>, std::vector<int>> buckets;

  Grid(const std::vector<SamplePoint>& pts, double cell_size) : cell(cell_size) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      buckets[key(pts[i].x, pts[i].y)].push_back(i);
  }
  std::pair<long long, long long> key(double x, double y) const {
    return {static_cast<long long>(std::floor(x / cell)),
            static_cast<long long>(std::floor(y / cell))};
  }
  template <typename Fn>
  void near(double x, double y, Fn&& fn) const {
    const auto [cx, cy] = key(x, y);
    for (long long dy = -1; dy <= 1; ++dy)
      for (long long dx = -1; dx <= 1; ++dx) {
        auto it = buckets.find({cx + dx, cy + dy});
        if (it == buckets.end()) continue;
        for (int i : it->second) fn(i);
      }
  }
};

struct Candidate {
  double dist;
  // coordinate tie-break keeps the matching a function of the point sets,
  // not of their ordering
  double gx, gy, hx, hy;
  int gi, hi;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  if (a.gx != b.gx) return a.gx < b.gx;
  if (a.gy != b.gy) return a.gy < b.gy;
  if (a.hx != b.hx) return a.hx < b.hx;
  if (a.hy != b.hy) return a.hy < b.hy;
  if (a.gi != b.gi) return a.gi < b.gi;
  return a.hi < b.hi;
}

std::vector<Candidate> candidates_within(const std::vector<SamplePoint>& gs,
                                         const std::vector<SamplePoint>& hs, double max_dist,
                                         bool haversine) {
  // grid cells sized in coordinate units; for haversine matching convert
  // the km cap to a degree radius wide enough at the data's worst latitude
  double cell = max_dist;
  if (haversine) {
    double lat_max = 0.0;
    for (const SamplePoint& s : gs) lat_max = std::max(lat_max, std::abs(s.y));
    for (const SamplePoint& s : hs) lat_max = std::max(lat_max, std::abs(s.y));
    lat_max = std::min(lat_max, 85.0);
    cell = max_dist / (111.0 * std::cos(lat_max * std::numbers::pi / 180.0));
  }
  Grid grid(hs, std::max(cell, 1e-12));
  std::vector<Candidate> cands;
  for (int gi = 0; gi < static_cast<int>(gs.size()); ++gi) {
    grid.near(gs[gi].x, gs[gi].y, [&](int hi) {
      const double d = point_dist(gs[gi], hs[hi], haversine);
      if (d <= max_dist)
        cands.push_back({d, gs[gi].x, gs[gi].y, hs[hi].x, hs[hi].y, gi, hi});
    });
  }
  std::sort(cands.begin(), cands.end(), candidate_less);
  return cands;
}

// Exhaustive assignment on the candidate graph; used only behind the
// optimal_matching flag for sensitivity runs, so a simple augmenting-path
// maximum matching (ties already distance-ordered) is enough.
std::vector<std::pair<int, int>> max_matching(const std::vector<Candidate>& cands,
                                              std::size_t n_g, std::size_t n_h) {
  std::vector<std::vector<int>> adj(n_g);
  for (const Candidate& c : cands) adj[c.gi].push_back(c.hi);
  std::vector<int> match_h(n_h, -1), match_g(n_g, -1);
  std::vector<char> used(n_h, 0);
  std::function<bool(int)> try_kuhn = [&](int g) -> bool {
    for (int h : adj[g]) {
      if (used[h]) continue;
      used[h] = 1;
      if (match_h[h] < 0 || try_kuhn(match_h[h])) {
        match_h[h] = g;
        match_g[g] = h;
        return true;
      }
    }
    return false;
  };
  for (std::size_t g = 0; g < n_g; ++g) {
    std::fill(used.begin(), used.end(), 0);
    try_kuhn(static_cast<int>(g));
  }
  std::vector<std::pair<int, int>> out;
  for (std::size_t g = 0; g < n_g; ++g)
    if (match_g[g] >= 0) out.push_back({static_cast<int>(g), match_g[g]});
  return out;
}

}  // namespace

std::vector<SamplePoint> sample_points(const RoadGraph& g, double interval, bool haversine) {
  if (!(interval > 0.0)) throw InvariantError("sample_points: interval must be positive");
  std::vector<SamplePoint> out;
  std::vector<char> node_sampled(g.nodes.size(), 0);
  auto emit_node = [&](int id, int cls) {
    if (node_sampled[id]) return;
    node_sampled[id] = 1;
    out.push_back({g.nodes[id].lon, g.nodes[id].lat, cls});
  };
  for (const auto& e : g.edges) {
    const GeoPoint& a = g.nodes[e.a];
    const GeoPoint& b = g.nodes[e.b];
    const double len = haversine ? haversine_km(a, b) : euclid(a.lon, a.lat, b.lon, b.lat);
    emit_node(e.a, e.cls);
    const long long steps = static_cast<long long>(std::floor(len / interval + 1e-9));
    for (long long i = 1; i < steps; ++i) {
      const double t = static_cast<double>(i) * interval / len;
      out.push_back({a.lon + (b.lon - a.lon) * t, a.lat + (b.lat - a.lat) * t, e.cls});
    }
    // the last interval sample collapses onto b when it lands there
    if (steps >= 1 && static_cast<double>(steps) * interval < len * (1.0 - 1e-12)) {
      const double t = static_cast<double>(steps) * interval / len;
      out.push_back({a.lon + (b.lon - a.lon) * t, a.lat + (b.lat - a.lat) * t, e.cls});
    }
    emit_node(e.b, e.cls);
  }
  return out;
}

std::vector<std::pair<int, int>> match_samples(const std::vector<SamplePoint>& gs,
                                               const std::vector<SamplePoint>& hs,
                                               double max_dist, bool haversine, bool optimal) {
  if (!(max_dist > 0.0)) throw InvariantError("match_samples: max_dist must be positive");
  const std::vector<Candidate> cands = candidates_within(gs, hs, max_dist, haversine);
  if (optimal) return max_matching(cands, gs.size(), hs.size());
  std::vector<char> g_used(gs.size(), 0), h_used(hs.size(), 0);
  std::vector<std::pair<int, int>> out;
  for (const Candidate& c : cands) {
    if (g_used[c.gi] || h_used[c.hi]) continue;
    g_used[c.gi] = 1;
    h_used[c.hi] = 1;
    out.push_back({c.gi, c.hi});
  }
  return out;
}

Prf1 prf1(std::size_t matched, std::size_t g_samples, std::size_t h_samples) {
  Prf1 r;
  r.precision = h_samples == 0 ? 0.0 : static_cast<double>(matched) / h_samples;
  r.recall = g_samples == 0 ? 0.0 : static_cast<double>(matched) / g_samples;
  r.f1 = (r.precision + r.recall) == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

namespace {

std::vector<SamplePoint> intersections_of(const RoadGraph& g, int k) {
  const RoadGraph s = simplify_to_segments(g);
  const std::vector<int> deg = node_degrees(s);
  std::vector<SamplePoint> pts;
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    if (deg[i] >= k) pts.push_back({s.nodes[i].lon, s.nodes[i].lat, 0});
  return pts;
}

}  // namespace

std::optional<double> ri_at_k(const RoadGraph& g, const RoadGraph& h, const SamplingParams& p) {
  if (p.k < 3) throw InvariantError("ri_at_k: k must be >= 3");
  const std::vector<SamplePoint> gi = intersections_of(g, p.k);
  if (gi.empty()) return std::nullopt;
  const std::vector<SamplePoint> hi = intersections_of(h, p.k);
  const auto matches = match_samples(gi, hi, p.max_match_dist, p.haversine, p.optimal_matching);
  return static_cast<double>(matches.size()) / static_cast<double>(gi.size());
}

MrlMrd mrl_mrd(const std::vector<LengthPair>& pairs) {
  MrlMrd out;
  double mrl_sum = 0.0, mrd_sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const LengthPair& p = pairs[i];
    if (!(p.g_len_km > 0.0) || !(p.area_km2 > 0.0)) {
      out.skipped.push_back(i);
      continue;
    }
    mrl_sum += std::abs(p.g_len_km - p.h_len_km) / p.g_len_km;
    const double gd = p.g_len_km / p.area_km2, hd = p.h_len_km / p.area_km2;
    mrd_sum += std::abs(gd - hd) / gd;
    ++n;
  }
  if (n > 0) {
    out.mrl = mrl_sum / static_cast<double>(n);
    out.mrd = mrd_sum / static_cast<double>(n);
  }
  return out;
}

std::array<std::optional<double>, 10> per_class_recall(const RoadGraph& g_classed,
                                                       const RoadGraph& h,
                                                       const SamplingParams& p) {
  for (const auto& e : g_classed.edges)
    if (e.cls < 1 || e.cls > 10)
      throw InvariantError("per_class_recall: every ground-truth edge needs a class in 1..10");
  const std::vector<SamplePoint> gs = sample_points(g_classed, p.sample_interval, p.haversine);
  const std::vector<SamplePoint> hs = sample_points(h, p.sample_interval, p.haversine);
  std::array<std::optional<double>, 10> out;
  for (int cls = 1; cls <= 10; ++cls) {
    std::vector<SamplePoint> cls_samples;
    for (const SamplePoint& s : gs)
      if (s.cls == cls) cls_samples.push_back(s);
    if (cls_samples.empty()) continue;
    const auto matches =
        match_samples(cls_samples, hs, p.max_match_dist, p.haversine, p.optimal_matching);
    out[cls - 1] = static_cast<double>(matches.size()) / static_cast<double>(cls_samples.size());
  }
  return out;
}

CountyEval evaluate_county(const std::string& county_id, const RoadGraph& g, const RoadGraph& h,
                           double area_km2, const SamplingParams& p, bool with_classes) {
  CountyEval ev;
  ev.county_id = county_id;
  ev.area_km2 = area_km2;
  const std::vector<SamplePoint> gs = sample_points(g, p.sample_interval, p.haversine);
  const std::vector<SamplePoint> hs = sample_points(h, p.sample_interval, p.haversine);
  const auto matches = match_samples(gs, hs, p.max_match_dist, p.haversine, p.optimal_matching);
  ev.g_samples = gs.size();
  ev.h_samples = hs.size();
  ev.matched = matches.size();
  ev.scores = prf1(ev.matched, ev.g_samples, ev.h_samples);
  ev.ri = ri_at_k(g, h, p);
  ev.g_len_km = total_length_km(g);
  ev.h_len_km = total_length_km(h);
  if (with_classes) ev.class_recall = per_class_recall(g, h, p);
  return ev;
}

EvalReport aggregate_report(std::vector<CountyEval> counties) {
  EvalReport rep;
  rep.counties = std::move(counties);
  if (rep.counties.empty()) return rep;
  std::vector<LengthPair> pairs;
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0, ri_sum = 0.0;
  std::size_t ri_n = 0;
  for (const CountyEval& c : rep.counties) {
    p_sum += c.scores.precision;
    r_sum += c.scores.recall;
    f_sum += c.scores.f1;
    if (c.ri) {
      ri_sum += *c.ri;
      ++ri_n;
    }
    pairs.push_back({c.g_len_km, c.h_len_km, c.area_km2});
  }
  const double n = static_cast<double>(rep.counties.size());
  rep.mean_precision = p_sum / n;
  rep.mean_recall = r_sum / n;
  rep.mean_f1 = f_sum / n;
  const MrlMrd m = mrl_mrd(pairs);
  rep.mrl = m.mrl;
  rep.mrd = m.mrd;
  if (ri_n > 0) rep.mean_ri = ri_sum / static_cast<double>(ri_n);
  return rep;
}

}  // namespace roadnet
