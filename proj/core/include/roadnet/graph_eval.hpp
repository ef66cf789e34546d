#ifndef ROADNET_GRAPH_EVAL_HPP
#define ROADNET_GRAPH_EVAL_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roadnet/road_graph.hpp"

namespace roadnet {

struct SamplingParams {
  double sample_interval = 0.01;  // coordinate units along edges
  double max_match_dist = 0.1;    // coordinate units
  int k = 3;                      // minimum degree counted as an intersection
  bool haversine = false;         // match in km instead of coordinate units
  bool optimal_matching = false;  // Hungarian-style assignment instead of greedy
};

struct SamplePoint {
  double x = 0.0;  // lon
  double y = 0.0;  // lat
  int cls = 0;     // class of the sampled edge, 0 if unclassed
};

// Points every `interval` of arc length along each edge, both endpoints
// included; endpoint samples shared between edges appear once.
std::vector<SamplePoint> sample_points(const RoadGraph& g, double interval,
                                       bool haversine = false);

// One-to-one matching of gs against hs under the distance cap: candidate
// pairs sorted by (distance, coordinates) and accepted greedily. Returns
// (g index, h index) pairs.
std::vector<std::pair<int, int>> match_samples(const std::vector<SamplePoint>& gs,
                                               const std::vector<SamplePoint>& hs,
                                               double max_dist, bool haversine = false,
                                               bool optimal = false);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Prf1 prf1(std::size_t matched, std::size_t g_samples, std::size_t h_samples);

// Intersection recovery for one county: fraction of G nodes of degree >= k
// (after segment simplification) that have an unclaimed H intersection
// within max_match_dist. Empty when G has no such node.
std::optional<double> ri_at_k(const RoadGraph& g, const RoadGraph& h, const SamplingParams& p);

struct LengthPair {
  double g_len_km = 0.0;
  double h_len_km = 0.0;
  double area_km2 = 1.0;
};

// Mean absolute percentage error of road length / road density across
// counties. Zero-length ground truths are skipped and reported back.
struct MrlMrd {
  double mrl = 0.0;
  double mrd = 0.0;
  std::vector<std::size_t> skipped;  // indices of excluded counties
};

MrlMrd mrl_mrd(const std::vector<LengthPair>& pairs);

// Per-class recall: G sampled class by class, each class matched against
// the full H sample set. Classes with no samples stay unset.
std::array<std::optional<double>, 10> per_class_recall(const RoadGraph& g_classed,
                                                       const RoadGraph& h,
                                                       const SamplingParams& p);

struct CountyEval {
  std::string county_id;
  Prf1 scores;
  std::optional<double> ri;
  std::size_t g_samples = 0;
  std::size_t h_samples = 0;
  std::size_t matched = 0;
  double g_len_km = 0.0;
  double h_len_km = 0.0;
  double area_km2 = 1.0;
  std::array<std::optional<double>, 10> class_recall;
};

// Full single-county evaluation with the same matching used throughout.
CountyEval evaluate_county(const std::string& county_id, const RoadGraph& g, const RoadGraph& h,
                           double area_km2, const SamplingParams& p, bool with_classes = false);

struct EvalReport {
  std::vector<CountyEval> counties;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double mrl = 0.0;
  double mrd = 0.0;
  std::optional<double> mean_ri;
};

EvalReport aggregate_report(std::vector<CountyEval> counties);

}  // namespace roadnet

#endif
