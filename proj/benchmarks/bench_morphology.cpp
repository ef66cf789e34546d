#include <random>

#include <benchmark/benchmark.h>

#include "roadnet/morphology.hpp"
#include "support/oracles.hpp"

using namespace roadnet;

namespace {

BitCanvas bench_canvas(int side, double density) {
  std::mt19937_64 rng(side);
  BitCanvas c = BitCanvas::zeros(TileCoord{0, 0, 0}, side, side);
  std::bernoulli_distribution bit(density);
  for (auto& b : c.bits) b = bit(rng) ? 1 : 0;
  return c;
}

void BM_close(benchmark::State& state) {
  const BitCanvas c = bench_canvas(static_cast<int>(state.range(0)), 0.25);
  const MorphParams p{11, 1};
  for (auto _ : state) benchmark::DoNotOptimize(close(c, p));
  state.SetItemsProcessed(state.iterations() * c.bits.size());
}
BENCHMARK(BM_close)->Arg(512)->Arg(1024)->Arg(2048);

void BM_skeletonize_blobs(benchmark::State& state) {
  std::mt19937_64 rng(99);
  BitCanvas c = BitCanvas::zeros(TileCoord{0, 0, 0}, static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(0)));
  // a handful of fat strokes, similar to a closed road mask
  for (int i = 0; i < 8; ++i) {
    std::uniform_int_distribution<int> pos(10, c.width - 10);
    const int y = pos(rng);
    for (int x = 10; x < c.width - 10; ++x)
      for (int dy = -4; dy <= 4; ++dy) c.set(x, y + dy, 1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(skeletonize(c));
}
BENCHMARK(BM_skeletonize_blobs)->Arg(256)->Arg(512);

void BM_refine(benchmark::State& state) {
  const BitCanvas c = bench_canvas(1024, 0.35);
  const MorphParams p{3, 64};
  for (auto _ : state) benchmark::DoNotOptimize(refine(c, p));
}
BENCHMARK(BM_refine);

}  // namespace
