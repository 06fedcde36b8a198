#include <benchmark/benchmark.h>

#include <random>

#include "qmatch/experiment.hpp"
#include "qmatch/optimize.hpp"
#include "qmatch/verify.hpp"

namespace {

using namespace qmatch;

Cdf many_knot_prior(int segments) {
  std::vector<std::pair<double, double>> pts;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  std::vector<double> rises(segments);
  double total = 0.0;
  for (double& r : rises) {
    r = unit(rng);
    total += r;
  }
  double cum = 0.0;
  pts.emplace_back(0.0, 0.0);
  for (int i = 0; i < segments; ++i) {
    cum += rises[i] / total;
    pts.emplace_back(static_cast<double>(i + 1) / segments, std::min(cum, 1.0));
  }
  pts.back().second = 1.0;
  return Cdf::from_points(Domain(0.0, 1.0), pts);
}

void BM_QuantileBounds(benchmark::State& state) {
  Cdf prior = many_knot_prior(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto bounds = quantile_bounds(prior, 0.5);
    benchmark::DoNotOptimize(bounds);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_QuantileBounds)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_MatchingRoundtrip(benchmark::State& state) {
  Cdf prior = many_knot_prior(static_cast<int>(state.range(0)));
  Experiment exp = matching_experiment(prior, 0.5);
  Selection sel = matching_selection(prior, prior, 0.5);
  for (auto _ : state) {
    PushforwardResult push = pushforward(exp, sel);
    benchmark::DoNotOptimize(push);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatchingRoundtrip)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_OptimizeQuadratic(benchmark::State& state) {
  Cdf prior = many_knot_prior(64);
  Objective v = Objective::quadratic(0.37);
  for (auto _ : state) {
    Optimum opt = optimize_quantile_dist(v, prior, 0.5);
    benchmark::DoNotOptimize(opt);
  }
}
BENCHMARK(BM_OptimizeQuadratic);

void BM_OptimizePiecewise(benchmark::State& state) {
  Cdf prior = many_knot_prior(64);
  std::vector<std::pair<double, double>> pts;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int n = static_cast<int>(state.range(0));
  for (int i = 0; i <= n; ++i) pts.emplace_back(static_cast<double>(i) / n, unit(rng));
  Objective v = Objective::piecewise_linear(pts);
  for (auto _ : state) {
    Optimum opt = optimize_quantile_dist(v, prior, 0.5);
    benchmark::DoNotOptimize(opt);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OptimizePiecewise)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_Simulate(benchmark::State& state) {
  Cdf prior = many_knot_prior(64);
  Experiment exp = matching_experiment(prior, 0.5);
  Selection sel = matching_selection(prior, prior, 0.5);
  for (auto _ : state) {
    Cdf emp = simulate(exp, sel, static_cast<size_t>(state.range(0)), 42);
    benchmark::DoNotOptimize(emp);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Range(1 << 10, 1 << 17);

void BM_FeasibilityCheck(benchmark::State& state) {
  int atoms = static_cast<int>(state.range(0));
  std::vector<std::pair<double, double>> prior_atoms;
  for (int i = 0; i < atoms; ++i) {
    prior_atoms.emplace_back((i + 0.5) / atoms, 1.0 / atoms);
  }
  AtomicDist prior(Domain(0.0, 1.0), prior_atoms);
  FiniteExperiment exp = discretize_experiment(matching_experiment(prior.to_cdf(), 0.5), 1);
  for (auto _ : state) {
    FeasibilityVerdict v =
        feasibility_check({exp, prior, FeasibilityMode::fractional}, 0.5);
    benchmark::DoNotOptimize(v);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FeasibilityCheck)->RangeMultiplier(2)->Range(8, 256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
