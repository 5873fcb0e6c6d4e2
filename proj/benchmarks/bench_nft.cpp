#include <benchmark/benchmark.h>

#include "nsd/nft.hpp"
#include "nsd/waveform.hpp"

using namespace nsd;

static void BM_ScatterA(benchmark::State& st) {
    auto s = SolitonSpec::from_center(cplx(0.1, 0.5), 0.0);
    auto sig = make_soliton(s, 0.0, TimeGrid::centered(static_cast<std::size_t>(st.range(0)), 80.0 / st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(scatter_a(sig, cplx(0.2, 0.3)));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_ScatterA)->RangeMultiplier(4)->Range(1 << 10, 1 << 14);

static void BM_DiscreteSpectrum(benchmark::State& st) {
    std::vector<SolitonSpec> specs = {SolitonSpec::from_center(cplx(0.0, 0.4), -2.0),
                                      SolitonSpec::from_center(cplx(0.1, 0.7), 2.0)};
    auto sig = make_nsoliton(specs, 0.0, TimeGrid::centered(static_cast<std::size_t>(st.range(0)), 100.0 / st.range(0)));
    auto region = SearchRegion::around({specs[0].zeta, specs[1].zeta}, 0.2, 0.1);
    for (auto _ : st) benchmark::DoNotOptimize(find_discrete_spectrum(sig, region, 2));
}
BENCHMARK(BM_DiscreteSpectrum)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
