#include <benchmark/benchmark.h>

#include "gflm/basis.hpp"
#include "gflm/simulation.hpp"

using namespace gflm;

namespace {

void BM_Eigenbasis(benchmark::State& state) {
  SimDesign d;
  d.n = 1000;
  d.grid_size = static_cast<std::size_t>(state.range(0));
  const auto [ds, mean] = center_dataset(generate_sample(d, 0));
  for (auto _ : state) {
    const Eigen::MatrixXd K = estimate_covariance(ds);
    benchmark::DoNotOptimize(eigenbasis(K, ds.grid(), ds.weight(), 20).functions());
  }
}
BENCHMARK(BM_Eigenbasis)->Arg(101)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_ProjectScores(benchmark::State& state) {
  SimDesign d;
  d.n = static_cast<std::size_t>(state.range(0));
  const FunctionalDataset ds = generate_sample(d, 0);
  const Basis b = fourier_basis(20, ds.grid());
  for (auto _ : state) benchmark::DoNotOptimize(project_scores(ds, b, 20).matrix());
}
BENCHMARK(BM_ProjectScores)->Arg(500)->Arg(5000);

}  // namespace
BENCHMARK_MAIN();
