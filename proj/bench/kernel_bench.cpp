// Serial reference vs OpenMP crossbar kernels.

#include "aidx/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace aidx;

namespace {

struct Fixture {
    std::size_t n;
    std::vector<MemristorState> cells;
    std::vector<RowPulse> pulses;
    std::vector<double> v, out;

    explicit Fixture(std::size_t size) : n(size), cells(size * size), pulses(size), v(size), out(size)
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-0.3, 0.3);
        for (auto& c : cells) c.w = 0.5;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = u(rng);
            pulses[i] = {v[i], 1e-3, v[i]};
        }
    }
};

void BM_drift_serial(benchmark::State& st)
{
    Fixture f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) kernels::drift_serial(f.cells, f.n, f.n, f.pulses, 1e-3);
    st.SetItemsProcessed(st.iterations() * static_cast<long>(f.n * f.n));
}

void BM_drift_omp(benchmark::State& st)
{
    Fixture f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) kernels::drift_omp(f.cells, f.n, f.n, f.pulses, 1e-3);
    st.SetItemsProcessed(st.iterations() * static_cast<long>(f.n * f.n));
}

void BM_currents_serial(benchmark::State& st)
{
    Fixture f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        kernels::currents_serial(f.cells, f.n, f.n, 0.5, f.v, f.out);
        benchmark::DoNotOptimize(f.out.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(f.n * f.n));
}

void BM_currents_omp(benchmark::State& st)
{
    Fixture f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        kernels::currents_omp(f.cells, f.n, f.n, 0.5, f.v, f.out);
        benchmark::DoNotOptimize(f.out.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(f.n * f.n));
}

} // namespace

BENCHMARK(BM_drift_serial)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_drift_omp)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_currents_serial)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_currents_omp)->Arg(32)->Arg(128)->Arg(512);

BENCHMARK_MAIN();
