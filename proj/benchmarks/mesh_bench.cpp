#include "cdm/mesh.hpp"

#include <benchmark/benchmark.h>

namespace {

cdm::Domain holed_block() {
  cdm::Domain d = cdm::Domain::rectangle(0.075, 0.075);
  d.holes.push_back({{0.0375, 0.025}, 0.008});
  return d;
}

void BM_SamplePoints(benchmark::State& state) {
  const cdm::Domain d = holed_block();
  const double lmin = 1e-3 * static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdm::sample_generator_points(d, cdm::DensityField{lmin, {}}, ++seed));
  }
}
BENCHMARK(BM_SamplePoints)->Arg(10)->Arg(5)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_BuildDualMesh(benchmark::State& state) {
  const cdm::Domain d = holed_block();
  const double lmin = 1e-3 * static_cast<double>(state.range(0));
  const cdm::GeneratorSet g = cdm::sample_generator_points(d, cdm::DensityField{lmin, {}}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cdm::build_dual_mesh(g, d));
  state.counters["points"] = static_cast<double>(g.size());
}
BENCHMARK(BM_BuildDualMesh)->Arg(10)->Arg(5)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
