#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "advseq/equilibrium.hpp"
#include "advseq/seqtest.hpp"
#include "advseq/simharness.hpp"

using namespace advseq;

namespace {

GameSpec bernoulli() {
  return GameSpec::create({Distribution({0.38, 0.62}), Distribution({0.5, 0.5})}, 0.05,
                          Measure::TvL1, {1.0, 1.0});
}

Distribution random_distribution(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  for (auto& x : v) x = e(rng) + 0.1;
  return normalize(v);
}

}  // namespace

static void BM_BallMinimum(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Measure m = state.range(1) ? Measure::Kl : Measure::TvL1;
  const DistortionBall ball(random_distribution(k, 1), 0.02, m);
  const Distribution qhat = random_distribution(k, 2);
  for (auto _ : state) benchmark::DoNotOptimize(min_divergence_value(qhat.probs(), ball));
}
BENCHMARK(BM_BallMinimum)->ArgsProduct({{2, 4, 16}, {0, 1}});

static void BM_PairwiseMinimum(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const DistortionBall a(random_distribution(k, 3), 0.05, Measure::TvL1);
  const DistortionBall b(random_distribution(k, 4), 0.05, Measure::TvL1);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_min_divergence(a, b).value);
}
BENCHMARK(BM_PairwiseMinimum)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

static void BM_ConstantC(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(compute_constant_c(0.85, 1e-9));
}
BENCHMARK(BM_ConstantC)->Unit(benchmark::kMillisecond);

static void BM_AwareStep(benchmark::State& state) {
  const GameSpec spec = bernoulli();
  const ThresholdSchedule schedule(1e-6, 2, 2);
  AwareTest test(spec, schedule);
  Rng rng(5);
  const Distribution q({0.405, 0.595});
  for (auto _ : state) {
    if (test.stopped()) test.reset();
    benchmark::DoNotOptimize(test.step(sample_index(q.probs(), rng)));
  }
}
BENCHMARK(BM_AwareStep);

static void BM_Replication(benchmark::State& state) {
  ScenarioConfig c(bernoulli());
  c.alpha_grid = {std::exp(-8.0)};
  c.threads = 1;
  const Scenario scenario(std::move(c));
  std::uint64_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(scenario.run_replication(0, 0, rep++));
}
BENCHMARK(BM_Replication)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
