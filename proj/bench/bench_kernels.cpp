#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "filament/envelope.hpp"
#include "filament/grid.hpp"
#include "filament/kernels.hpp"

using namespace filament;

namespace {

std::vector<cplx> random_field(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(d(rng), d(rng));
    return v;
}

void BM_multiply_serial(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    auto data = random_field(2 * n, 1);
    auto tab = random_field(n, 2);
    for (auto _ : st) {
        kernels::serial::multiply_modes(data.data(), tab.data(), n, 2);
        benchmark::DoNotOptimize(data.data());
    }
}

void BM_multiply_parallel(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    auto data = random_field(2 * n, 1);
    auto tab = random_field(n, 2);
    for (auto _ : st) {
        kernels::parallel::multiply_modes(data.data(), tab.data(), n, 2);
        benchmark::DoNotOptimize(data.data());
    }
}

void BM_matvec4_serial(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    auto data = random_field(4 * n, 3);
    auto mats = random_field(16 * n, 4);
    for (auto _ : st) {
        kernels::serial::matvec_modes(data.data(), mats.data(), n, 4);
        benchmark::DoNotOptimize(data.data());
    }
}

void BM_matvec4_parallel(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    auto data = random_field(4 * n, 3);
    auto mats = random_field(16 * n, 4);
    for (auto _ : st) {
        kernels::parallel::matvec_modes(data.data(), mats.data(), n, 4);
        benchmark::DoNotOptimize(data.data());
    }
}

void BM_kerr_serial(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    auto v = random_field(n, 5);
    for (auto _ : st) {
        kernels::serial::kerr_rotate(v.data(), n, 1e-3, 0.5, KerrShape::saturated);
        benchmark::DoNotOptimize(v.data());
    }
}

void BM_kerr_parallel(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    auto v = random_field(n, 5);
    for (auto _ : st) {
        kernels::parallel::kerr_rotate(v.data(), n, 1e-3, 0.5, KerrShape::saturated);
        benchmark::DoNotOptimize(v.data());
    }
}

void BM_family_step_2d(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const GridSpec g = make_grid(2, {n, n}, {6.283185307179586, 6.283185307179586});
    ModelConfig cfg;
    cfg.model = ModelKind::family_scalar;
    const EnvelopeSolver solver(g, cfg, 1e-3);
    auto prof = random_field(g.size(), 6);
    for (auto& x : prof) x *= 0.1;
    EnvelopeState s = make_envelope_state(g, cfg, prof);
    for (auto _ : st) {
        solver.step(s);
        benchmark::DoNotOptimize(s.u.data.data());
    }
}

}  // namespace

BENCHMARK(BM_multiply_serial)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_multiply_parallel)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_matvec4_serial)->Arg(1 << 14)->Arg(1 << 16);
BENCHMARK(BM_matvec4_parallel)->Arg(1 << 14)->Arg(1 << 16);
BENCHMARK(BM_kerr_serial)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_kerr_parallel)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_family_step_2d)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
