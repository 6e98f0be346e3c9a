#include <benchmark/benchmark.h>

#include "cbp/kernel.hpp"
#include "cbp/mechanism.hpp"
#include "cbp/paths.hpp"
#include "cbp/random.hpp"
#include "cbp/scale.hpp"

namespace {

void BM_Psi(benchmark::State& state) {
  const auto m = cbp::make_mechanism(cbp::StableGaussian{1.0, 1.5, 0.5});
  double lambda = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.psi(lambda));
    lambda = lambda < 1e6 ? lambda * 1.01 : 0.1;
  }
}
BENCHMARK(BM_Psi);

void BM_KernelBuild(benchmark::State& state) {
  const auto m = cbp::make_mechanism(cbp::StableGaussian{1.0, 1.5, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(cbp::build_kernel(m));
}
BENCHMARK(BM_KernelBuild)->Unit(benchmark::kMillisecond);

void BM_NumericVarphi(benchmark::State& state) {
  cbp::KernelOptions opts;
  opts.force_numeric = true;
  const auto k = cbp::build_kernel(cbp::make_mechanism(cbp::Stable{1.0, 1.5}), opts);
  double t = 1e-2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k.varphi(t));
    t = t < 1e2 ? t * 1.01 : 1e-2;
  }
}
BENCHMARK(BM_NumericVarphi);

void BM_ScaleNumeric(benchmark::State& state) {
  const cbp::ScaleFunction w(cbp::make_mechanism(cbp::StableGaussian{1.0, 1.5, 0.5}));
  double x = 1e-2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(w.numeric(x));
    x = x < 1e2 ? x * 1.1 : 1e-2;
  }
}
BENCHMARK(BM_ScaleNumeric)->Unit(benchmark::kMicrosecond);

void BM_StableSampler(benchmark::State& state) {
  cbp::PathRng rng(1, 0);
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(cbp::sample_skewed_stable(alpha, rng));
}
BENCHMARK(BM_StableSampler)->Arg(12)->Arg(15)->Arg(19);

void BM_SimulatePath(benchmark::State& state) {
  const auto m = cbp::make_mechanism(cbp::Stable{1.0, 1.5});
  cbp::SimulationOptions sim;
  sim.policy = cbp::AdaptiveExtinction{1e-3};
  std::uint64_t stream = 0;
  std::size_t nodes = 0;
  for (auto _ : state) {
    const auto p = cbp::simulate_path(m, 1.0, sim, 7, stream++);
    nodes += p.values.size();
  }
  state.counters["nodes/path"] = benchmark::Counter(static_cast<double>(nodes), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_SimulatePath)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
