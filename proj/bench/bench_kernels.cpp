// Serial against OpenMP for the three kernels that loop over independent
// lines or cells. Arg(0) is serial, Arg(1) parallel; the grid is the second arg.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "symfr/frames2d.hpp"
#include "symfr/models.hpp"
#include "symfr/transport.hpp"
#include "symfr/wannier.hpp"

using namespace symfr;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Exec::serial : Exec::parallel; }

ProjectorFamily qwz(int n) { return projector_from_hamiltonian(builtin_doubled_qwz(3.0), KGrid::make(n, n)); }

void label(benchmark::State& s) {
    s.SetLabel(s.range(0) == 0 ? "serial" : "omp x" + std::to_string(omp_get_max_threads()));
}

void BM_transport_lines(benchmark::State& s) {
    const int n = static_cast<int>(s.range(1));
    const auto p = qwz(n);
    std::vector<double> k2;
    for (int j = 0; j <= n / 2; ++j) k2.push_back(static_cast<double>(j) / n);
    for (auto _ : s) benchmark::DoNotOptimize(transport_lines(p, k2, n, 0, n, {}, exec_of(s)));
    label(s);
}

void BM_matching_family(benchmark::State& s) {
    const auto p = qwz(static_cast<int>(s.range(1)));
    for (auto _ : s) benchmark::DoNotOptimize(matching_family(p, {}, exec_of(s)));
    label(s);
}

void BM_wannier_synthesis(benchmark::State& s) {
    const int n = static_cast<int>(s.range(1));
    const auto f = construct_frame_2d(qwz(n), true);
    for (auto _ : s) benchmark::DoNotOptimize(synthesize(f.frame, n / 8, exec_of(s)));
    label(s);
}

}  // namespace

BENCHMARK(BM_transport_lines)->ArgsProduct({{0, 1}, {32, 64}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matching_family)->ArgsProduct({{0, 1}, {32}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_wannier_synthesis)->ArgsProduct({{0, 1}, {32, 64}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
