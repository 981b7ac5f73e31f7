#include <benchmark/benchmark.h>

#include <vector>

#include "pathfbsde/euler.hpp"
#include "pathfbsde/parallel.hpp"
#include "pathfbsde/picard.hpp"
#include "pathfbsde/regression.hpp"
#include "pathfbsde/sampling.hpp"

using namespace pathfbsde;

namespace {

void BM_Normals(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  std::uint64_t first = 0;
  for (auto _ : state) {
    fillStandardNormals(42, first, out);
    first += out.size();
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Normals)->Arg(1 << 12);

void BM_EulerPath(benchmark::State& state) {
  const CoefficientSet cs = problemZoo(state.range(1) ? "path-sigma" : "abm-linear").coefficients;
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const DiscretePath origin = DiscretePath::constant(1, 0.0);
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cs, origin, grid, SampleKey(1, {k++})).path.horizon());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EulerPath)->Args({64, 0})->Args({64, 1})->Args({1024, 1});

void BM_RegressionAccumulate(benchmark::State& state) {
  const std::size_t p = static_cast<std::size_t>(state.range(0));
  std::vector<double> phi(p, 0.5), y{1.0, 2.0};
  RegressionAccumulator acc(p, 2);
  for (auto _ : state) acc.add(phi, y);
  benchmark::DoNotOptimize(acc.samples());
}
BENCHMARK(BM_RegressionAccumulate)->Arg(5)->Arg(13);

void BM_PicardStep(benchmark::State& state) {
  setThreadCount(1);
  const CoefficientSet cs = problemZoo("discounted-terminal").coefficients;
  const DiscretePath origin = DiscretePath::constant(1, 0.0);
  SchemeConfig c;
  c.grid = TimeGrid::uniform(0.0, 1.0, 32);
  c.samples = static_cast<std::size_t>(state.range(0));
  const SchemeIterate start = SchemeIterate::initial(cs, c);
  for (auto _ : state) benchmark::DoNotOptimize(picardStep(start, cs, origin, c).start().y0);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 32);
  setThreadCount(0);
}
BENCHMARK(BM_PicardStep)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
