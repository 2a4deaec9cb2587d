#include "idexp/projection.hpp"
#include "idexp/synthetic.hpp"

#include <benchmark/benchmark.h>

namespace {

idexp::ShapeModel model_of(benchmark::State& state) {
  idexp::SyntheticSpec spec;
  spec.n = state.range(0);
  spec.m = state.range(1);
  spec.k = state.range(1);
  spec.seed = 2;
  return idexp::generate(spec);
}

void BM_ProjectorSetup(benchmark::State& state) {
  const auto model = model_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(idexp::Projector(model, idexp::Block::Full).r().data());
}
BENCHMARK(BM_ProjectorSetup)->Args({3000, 50})->Args({30000, 100})->Unit(benchmark::kMillisecond);

void BM_Project(benchmark::State& state) {
  const auto model = model_of(state);
  const idexp::Projector p(model, idexp::Block::Full);
  const auto f = idexp::synthesize(model, idexp::sample_latents(model, idexp::Block::Full, 1, 3)[0]);
  for (auto _ : state) benchmark::DoNotOptimize(p.project(f).residual_norm);
}
BENCHMARK(BM_Project)->Args({3000, 50})->Args({30000, 100})->Unit(benchmark::kMicrosecond);

}  // namespace
