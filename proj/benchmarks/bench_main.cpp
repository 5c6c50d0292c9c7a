#include <benchmark/benchmark.h>

#include <numbers>

#include "gpest/analytic.hpp"
#include "gpest/experiments.hpp"

using namespace gpest;

static void BM_ApplyNetworkG2(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  RandomSource rng(1, 0);
  const Network net = perturb(build_g2(m), {0.1}, rng);
  AmplitudeEnsemble e = sample_amplitudes({1, 0, 1}, std::size_t{1} << m, rng);
  for (auto _ : state) {
    apply_network_inplace(e, net);
    benchmark::DoNotOptimize(e.a.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(net.ops.size()));
}
BENCHMARK(BM_ApplyNetworkG2)->DenseRange(4, 12, 4);

static void BM_CompileRotation(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Network net = build_g2(m);
  for (auto _ : state) benchmark::DoNotOptimize(compile_rotation(net));
}
BENCHMARK(BM_CompileRotation)->DenseRange(4, 8, 2);

static void BM_MomentEngine(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hayashi_nu_variance({1, 0.5, 1}, 0.1, m));
}
BENCHMARK(BM_MomentEngine)->Arg(4)->Arg(16)->Arg(40);

static void BM_CorrectedMoments(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(corrected_closed_forms({1, 0.5, 1}, 0.1, m, m / 2));
}
BENCHMARK(BM_CorrectedMoments)->Arg(6)->Arg(20);

static void BM_TrigMoment(benchmark::State& state) {
  double v = 0.0;
  for (auto _ : state) {
    for (int p = 0; p <= 4; ++p) v += trig_moment(p, 4 - p, std::numbers::pi / 4, 0.3);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_TrigMoment);

// One full replicate: prior draw, noisy network, measurement, estimate.
static void BM_MonteCarloReplicate(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Scenario sc = Scenario::corrected({1, 0.5, 1}, m, m / 2, 0.1);
  sc.replicates = 4096;
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(sc));
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_MonteCarloReplicate)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_RaoBlackwellReplicate(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Scenario sc = Scenario::hayashi({1, 0.5, 1}, m, 0.1);
  sc.replicates = 4096;
  for (auto _ : state) benchmark::DoNotOptimize(rao_blackwell_mc(sc));
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_RaoBlackwellReplicate)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_Crossover(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(crossover_theta(1.0, 0.2));
}
BENCHMARK(BM_Crossover);

BENCHMARK_MAIN();
