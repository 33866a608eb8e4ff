#include <benchmark/benchmark.h>

#include "gflm/glm.hpp"
#include "gflm/simulation.hpp"
#include "gflm/smoothing.hpp"
#include "gflm/spqr.hpp"

using namespace gflm;

namespace {

ScoreMatrix scores_for(std::size_t n, std::size_t p, LinkKind link, Eigen::VectorXd* y) {
  SimDesign d;
  d.n = n;
  d.link_true = link;
  const FunctionalDataset ds = generate_sample(d, 3);
  *y = ds.responses();
  return project_scores(ds, fourier_basis(p, ds.grid()), p);
}

void BM_Iwls(benchmark::State& state) {
  Eigen::VectorXd y;
  const ScoreMatrix s = scores_for(static_cast<std::size_t>(state.range(0)), 6, LinkKind::kLogit, &y);
  for (auto _ : state) benchmark::DoNotOptimize(iwls_fit(s, y, Link(LinkKind::kLogit)).beta);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Iwls)->RangeMultiplier(4)->Range(128, 8192)->Complexity();

void BM_LocalLinear(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(n);
  const Eigen::VectorXd y = (x.array().sin() + 0.1 * Eigen::ArrayXd::Random(n)).matrix();
  const Eigen::VectorXd at = Eigen::VectorXd::LinSpaced(201, -1.0, 1.0);
  SmootherConfig cfg;
  cfg.bandwidth = rule_of_thumb_bandwidth(x);
  for (auto _ : state) benchmark::DoNotOptimize(local_poly_smooth(x, y, at, cfg, 0));
  state.SetComplexityN(n);
}
BENCHMARK(BM_LocalLinear)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_Spqr(benchmark::State& state) {
  Eigen::VectorXd y;
  const ScoreMatrix s = scores_for(static_cast<std::size_t>(state.range(0)), 3, LinkKind::kCloglog, &y);
  for (auto _ : state) benchmark::DoNotOptimize(spqr_fit(s, y, SpqrConfig{}, Link(LinkKind::kLogit)).fit.beta);
}
BENCHMARK(BM_Spqr)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
