#include <memory>
#include <random>

#include <benchmark/benchmark.h>
#include <tmscat/tmscat.hpp>

using namespace tmscat;

namespace {

std::shared_ptr<const MomentumGrid> make_grid(int d, int n) {
  ScatteringConfig cfg;
  cfg.d = d;
  cfg.k = 1.0;
  cfg.n_per_axis = n;
  return std::make_shared<const MomentumGrid>(build_grid(cfg));
}

BlockOperator random_operator(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.1);
  CMatrix m = CMatrix::Identity(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    for (Eigen::Index j = 0; j < 2 * n; ++j) m(i, j) += cplx(nd(rng), nd(rng));
  }
  return BlockOperator(m);
}

void BM_AssembleH(benchmark::State& state) {
  const auto grid = make_grid(1, static_cast<int>(state.range(0)));
  const auto v = random_gaussian_mixture(7, 3, 0.3, 1);
  const EffectiveHamiltonian h(v, grid, 1.0);
  double x = -0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h.at(x));
    x += 1e-3;
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleH)->Arg(16)->Arg(32)->Arg(64)->Arg(128)->Complexity();

void BM_AssembleH2D(benchmark::State& state) {
  const auto grid = make_grid(2, static_cast<int>(state.range(0)));
  const auto v = gaussian(cplx{0.3, 0.1}, 0.8, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_H(v, *grid, 1.0, 0.1));
}
BENCHMARK(BM_AssembleH2D)->Arg(8)->Arg(12);

void BM_IntegrateTransfer(benchmark::State& state) {
  ScatteringConfig cfg;
  cfg.d = 1;
  cfg.k = 1.0;
  cfg.n_per_axis = static_cast<int>(state.range(0));
  const auto v = random_gaussian_mixture(7, 3, 0.3, 1);
  StepperOptions opts;
  opts.rtol = 1e-8;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_transfer(v, cfg, opts));
}
BENCHMARK(BM_IntegrateTransfer)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Transfer1D(benchmark::State& state) {
  const auto v = random_gaussian_mixture(11, 4, 0.4, 0);
  StepperOptions opts;
  opts.rtol = 1e-10;
  for (auto _ : state) benchmark::DoNotOptimize(transfer_1d(v, 1.3, opts));
}
BENCHMARK(BM_Transfer1D)->Unit(benchmark::kMicrosecond);

void BM_StarProduct(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const BlockOperator a = transfer_to_s(random_operator(n, 1));
  const BlockOperator b = transfer_to_s(random_operator(n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(star_product(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StarProduct)->Arg(16)->Arg(64)->Arg(128)->Complexity();

void BM_AmplitudeExtraction(benchmark::State& state) {
  ScatteringConfig cfg;
  cfg.d = 1;
  cfg.k = 1.0;
  cfg.n_per_axis = 32;
  const auto m = integrate_transfer(random_gaussian_mixture(7, 3, 0.3, 1), cfg, StepperOptions{}).transfer;
  for (auto _ : state) benchmark::DoNotOptimize(AmplitudeExtractor(m));
}
BENCHMARK(BM_AmplitudeExtraction);

}  // namespace

BENCHMARK_MAIN();
