#include <benchmark/benchmark.h>

#include "qbs/engine.hpp"

namespace {

qbs::ModelConfig bench_config(std::int64_t paths) {
  qbs::ModelConfig c;
  c.eps_transform = 0.02;
  c.n_paths = paths;
  c.n_steps = 2;
  return c;
}

qbs::ParticleEnsemble after_first_step(const qbs::ModelConfig& c) {
  auto e = qbs::ParticleEnsemble::at_start(c);
  const auto coeffs = qbs::eval_coefficients(c);
  qbs::step(e, nullptr, qbs::fit_kernel(c), coeffs, c);
  return e;
}

// Factor computation over a post-bootstrap ensemble; threads = range(1).
void BM_Factors(benchmark::State& state) {
  const auto c = bench_config(state.range(0));
  const auto e = after_first_step(c);
  const auto kernel = qbs::fit_kernel(c);
  const auto hist = qbs::build_histogram(e.states, c.buckets_per_dim(), 1);
  const double floor = qbs::density_floor(hist, c.density_floor_mult);
  std::vector<double> out(e.size());
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    if (threads == 1) {
      qbs::compute_factors(e.states, hist, kernel, floor, out);
    } else {
      qbs::compute_factors_parallel(e.states, hist, kernel, floor, out, threads);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Factors)->Args({100000, 1})->Args({100000, 2})->Args({100000, 4})
    ->Unit(benchmark::kMillisecond);

void BM_Histogram(benchmark::State& state) {
  const auto c = bench_config(state.range(0));
  const auto e = after_first_step(c);
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto h = threads == 1 ? qbs::build_histogram(e.states, c.buckets_per_dim(), 1)
                          : qbs::build_histogram_parallel(e.states, c.buckets_per_dim(), 1, threads);
    benchmark::DoNotOptimize(h.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Histogram)->Args({100000, 1})->Args({100000, 4})->Unit(benchmark::kMicrosecond);

void BM_Simulate(benchmark::State& state) {
  auto c = bench_config(state.range(0));
  c.n_steps = 5;
  const qbs::ExecOptions exec{static_cast<int>(state.range(1))};
  for (auto _ : state) {
    auto out = qbs::simulate(c, exec);
    benchmark::DoNotOptimize(out.ensemble.states.data());
  }
}
BENCHMARK(BM_Simulate)->Args({100000, 1})->Args({100000, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
