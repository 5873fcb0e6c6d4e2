#include <benchmark/benchmark.h>

#include "nsd/harness.hpp"
#include "nsd/perturb.hpp"

using namespace nsd;

static void BM_SdePath(benchmark::State& st) {
    PropagationConfig p;
    p.eps2 = 1.339e-9;
    p.total_z = 7000;
    p.dz = 7000.0 / static_cast<double>(st.range(0));
    p.noise_on = true;
    Engine rng(1);
    for (auto _ : st) benchmark::DoNotOptimize(simulate_soliton_sde({0.0, 0.028, 0.0, 0.0}, p, rng));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_SdePath)->Arg(100)->Arg(1000);

static void BM_Experiment(benchmark::State& st) {
    ExperimentConfig c;
    c.trials = 1000;
    c.ensemble = InputEnsemble::point(0.0, 0.028);
    c.prop.eps2 = 1.339e-9;
    c.prop.total_z = 7000;
    c.prop.dz = 7;
    for (auto _ : st) benchmark::DoNotOptimize(run_experiment(c));
}
BENCHMARK(BM_Experiment)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
