// Serial reference vs OpenMP path for each data-parallel kernel. The second
// benchmark argument selects the path: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "collrabi/broadening.hpp"
#include "collrabi/datagen.hpp"
#include "collrabi/dynamics.hpp"
#include "collrabi/fitting.hpp"
#include "collrabi/units.hpp"

using namespace collrabi;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::serial : Exec::parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(1) == 0 ? "serial" : "openmp"); }

void BM_BroadenedSignal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> times(n), out(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = 0.3 * static_cast<double>(i) / static_cast<double>(n);
  const ChirpedOscParams p{8.0, 6.0, 0.1, units::mhz_to_angular(50.9), 0.0};
  const double alpha = units::alpha_from_sigma(units::mhz_to_angular(2.5));
  BroadenedSignal signal;
  signal.prepare(p.omega_n, alpha);
  for (auto _ : state) {
    signal.evaluate(p, alpha, times, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
  label(state);
}
BENCHMARK(BM_BroadenedSignal)->ArgsProduct({{150, 1500, 15000}, {0, 1}})->Unit(benchmark::kMicrosecond)->UseRealTime();

void BM_EnsembleAverage(benchmark::State& state) {
  DynamicsConfig cfg = default_dynamics_config();
  cfg.t_end = 0.3 * static_cast<double>(state.range(0)) / 100.0;
  const BroadeningParams b{units::alpha_from_sigma(units::mhz_to_angular(2.5)), kDefaultHermiteNodes};
  for (auto _ : state) benchmark::DoNotOptimize(ensemble_average(cfg, b, exec_of(state)));
  label(state);
}
BENCHMARK(BM_EnsembleAverage)->ArgsProduct({{10, 100}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Synth(benchmark::State& state) {
  SynthSpec spec = preset("fig2e");
  spec.n_bins = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(synth(spec, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  label(state);
}
BENCHMARK(BM_Synth)->ArgsProduct({{150, 15000}, {0, 1}})->Unit(benchmark::kMicrosecond)->UseRealTime();

void BM_MultiStartFit(benchmark::State& state) {
  const SynthSpec spec = preset("fig2e");
  const TimeTrace trace = synth(spec);
  FitModelSpec fit_spec;
  fit_spec.fixed["alpha"] = spec.model.params.at("alpha");
  for (auto _ : state) {
    benchmark::DoNotOptimize(multi_start_fit(trace, fit_spec, static_cast<int>(state.range(0)), 1, exec_of(state)));
  }
  label(state);
}
BENCHMARK(BM_MultiStartFit)->ArgsProduct({{4}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
