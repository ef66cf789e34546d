#include <random>

#include <benchmark/benchmark.h>

#include "roadnet/graph_eval.hpp"
#include "support/synthetic.hpp"

using namespace roadnet;

namespace {

void BM_sample_and_match(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const RoadGraph g = synthetic::random_road_graph(rng, 60, 80);
  RoadGraph h = g;
  // perturb H a little so matching does real work
  for (auto& n : h.nodes) {
    n.lon += 1e-4;
    n.lat -= 5e-5;
  }
  const double interval = 1e-3;
  const double max_dist = state.range(0) * 1e-4;
  for (auto _ : state) {
    const auto gs = sample_points(g, interval);
    const auto hs = sample_points(h, interval);
    benchmark::DoNotOptimize(match_samples(gs, hs, max_dist));
  }
}
BENCHMARK(BM_sample_and_match)->Arg(2)->Arg(10);

}  // namespace
