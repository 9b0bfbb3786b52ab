#include <benchmark/benchmark.h>

#include "ssi/diagnostics.hpp"
#include "ssi/inversion.hpp"

using namespace ssi;

namespace {

const ScoreOracle& oracle() {
  static const ScoreOracle o(SubspaceGaussianScore::smooth_image({3, 8, 8}, 8, Vector::Ones(8), 1));
  return o;
}

void roundtrip_batch(benchmark::State& state, Execution ex) {
  const auto& o = oracle();
  const auto sch = NoiseSchedule::ve();
  const TimeGrid full = karras_grid(0.002, 80.0, 7.0, 100).without_zero();
  const TimeGrid back = full.reversed();
  const auto trials = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const auto errs = run_trials(
        trials,
        [&](std::size_t i) {
          const ScoreModel model(o, 1e-3, derive_seed(5, i, 3));
          const Vector x0 = o.sample_one(5, i);
          InversionConfig ic;
          ic.t_ssi = full[10];
          ic.grid = full.starting_at(ic.t_ssi);
          ic.noise_seed = derive_seed(5, i, 2);
          const auto inv = invert(model, sch, x0, ic);
          return mse(x0, reconstruct(model, sch, inv, back, {}).x0_hat);
        },
        ex);
    benchmark::DoNotOptimize(errs.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_serial(benchmark::State& s) { roundtrip_batch(s, Execution::Serial); }
void BM_parallel(benchmark::State& s) { roundtrip_batch(s, Execution::Parallel); }

void BM_projection(benchmark::State& state, Execution ex) {
  for (auto _ : state) benchmark::DoNotOptimize(projection_ratios(oracle(), 0.01, state.range(0), 7, ex).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_projection, serial, Execution::Serial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_projection, parallel, Execution::Parallel)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
