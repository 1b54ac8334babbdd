#include <random>

#include <benchmark/benchmark.h>

#include "dualmpc/controller.hpp"
#include "dualmpc/estimator.hpp"
#include "dualmpc/simulation.hpp"

using namespace dualmpc;

namespace {

MeasurementWindow sample_window(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3, 3);
  MeasurementWindow w(10);
  const Eigen::Vector2d p(5, 8);
  Vector x = Eigen::Vector2d(5, 10);
  w.reset(0, x, bearing_observe(x, p));
  for (int k = 1; k < 10; ++k) {
    Vector step = Eigen::Vector2d(u(rng), u(rng));
    x = x + 0.1 * step;
    w.push(x, bearing_observe(x, p), step);
  }
  return w;
}

void BM_FastUpdate(benchmark::State& state) {
  BearingModel model({});
  auto w = sample_window(1);
  EstimatorConfig cfg;
  EstimateState est{Eigen::Vector2d(3, 10)};
  for (auto _ : state) benchmark::DoNotOptimize(fast_update(est, w, cfg, model));
}
BENCHMARK(BM_FastUpdate);

void BM_FullSolve(benchmark::State& state) {
  BearingModel model({});
  auto w = sample_window(2);
  EstimatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(full_solve(w, Eigen::Vector2d(5, 8), cfg, model));
}
BENCHMARK(BM_FullSolve);

void BM_SolveMpc(benchmark::State& state) {
  BearingModel model({});
  auto w = sample_window(3);
  NominalFeedback fb;
  MpcConfig cfg;
  cfg.ring_samples = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_mpc(w, Eigen::Vector2d(4, 9), w.newest_state(), cfg, fb, model));
}
BENCHMARK(BM_SolveMpc)->Arg(16)->Arg(64)->Arg(256);

void BM_ClosedLoop(benchmark::State& state) {
  SimConfig cfg;
  cfg.oracle = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(run(cfg));
}
BENCHMARK(BM_ClosedLoop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
