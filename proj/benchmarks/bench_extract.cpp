#include <benchmark/benchmark.h>

#include "roadnet/graph_extract.hpp"
#include "roadnet/morphology.hpp"
#include "support/synthetic.hpp"

using namespace roadnet;

namespace {

void BM_extract_grid(benchmark::State& state) {
  // a dense skeleton lattice, roughly county-shaped workload per km^2
  const int side = static_cast<int>(state.range(0));
  BitCanvas c = BitCanvas::zeros(TileCoord{109776, 52800, 17}, side, side);
  for (int y = 20; y < side - 10; y += 60) synthetic::hline(c, y, 10, side - 11);
  for (int x = 20; x < side - 10; x += 60) synthetic::vline(c, x, 10, side - 11);
  for (auto _ : state) benchmark::DoNotOptimize(extract_graph(c, ExtractParams{50}));
}
BENCHMARK(BM_extract_grid)->Arg(512)->Arg(1024);

void BM_simplify(benchmark::State& state) {
  const int side = 1024;
  BitCanvas c = BitCanvas::zeros(TileCoord{109776, 52800, 17}, side, side);
  for (int y = 20; y < side - 10; y += 60) synthetic::hline(c, y, 10, side - 11);
  for (int x = 20; x < side - 10; x += 60) synthetic::vline(c, x, 10, side - 11);
  const RoadGraph g = extract_graph(c, ExtractParams{25});
  for (auto _ : state) benchmark::DoNotOptimize(simplify_to_segments(g));
}
BENCHMARK(BM_simplify);

}  // namespace
