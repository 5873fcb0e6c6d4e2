#include <benchmark/benchmark.h>

#include "nsd/ssfm.hpp"
#include "nsd/waveform.hpp"

using namespace nsd;

static void BM_Propagate(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    auto sig = make_soliton(SolitonSpec::from_center(cplx(0.0, 0.5), 0.0), 0.0, TimeGrid::centered(n, 51.2 / n));
    PropagationConfig p;
    p.total_z = 1.0;
    p.dz = 0.01;
    p.eps2 = st.range(1) ? 1e-5 : 0.0;
    p.noise_on = st.range(1) != 0;
    for (auto _ : st) benchmark::DoNotOptimize(propagate(sig, p));
    st.SetItemsProcessed(st.iterations() * p.steps());
}
BENCHMARK(BM_Propagate)->ArgsProduct({{256, 4096}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
