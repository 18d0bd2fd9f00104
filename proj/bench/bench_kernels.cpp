// bench_kernels.cpp: OpenMP drivers against their serial references.

#include "activegrid/fock.hpp"
#include "activegrid/mcwf.hpp"
#include "activegrid/sde.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace activegrid;

namespace {

NetworkSpec chain(Index n) {
    return build_chain(n, 1.0, {1e-3, 10.0}, {4.0, {100.0, 2.0}}, {6.0, {100.0, 2.0}});
}

sde::EnsembleConfig short_ensemble(Index n_traj) {
    sde::EnsembleConfig e;
    e.n_traj = n_traj;
    e.burn_in_time = 1.0;
    e.n_samples = 100;
    e.sample_stride_steps = 100;
    return e;
}

void drift_reference(benchmark::State& state) {
    const auto spec = chain(state.range(0));
    sde::AmplitudeState a{std::vector<Complex>(spec.n_sites(), Complex(1.0, 0.5)), 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sde::drift(a, spec));
    }
}

void drift_kernel(benchmark::State& state) {
    const auto spec = chain(state.range(0));
    const sde::Kernel kernel(spec);
    std::vector<Complex> a(spec.n_sites(), Complex(1.0, 0.5)), f(spec.n_sites());
    for (auto _ : state) {
        kernel.drift(a.data(), f.data());
        benchmark::DoNotOptimize(f.data());
    }
}

template <bool parallel>
void ensemble(benchmark::State& state) {
    const auto spec = chain(10);
    sde::IntegratorConfig integ;
    integ.seed = 1;
    const auto ens = short_ensemble(state.range(0));
    for (auto _ : state) {
        auto rec = parallel ? sde::run_ensemble(spec, integ, ens)
                            : sde::run_ensemble_serial(spec, integ, ens);
        benchmark::DoNotOptimize(rec.mean_current.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 20000);
    state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
}

template <bool parallel>
void mcwf(benchmark::State& state) {
    const auto spec = build_chain(2, 1.0, {1e-2, 0.0}, {4.0, {}}, {6.0, {}});
    const auto model = fock::build_quantum_model(spec, fock::FockSpace(2, 12));
    fock::McwfConfig c;
    c.burn_in_time = 1.0;
    c.n_samples = 20;
    c.sample_stride_steps = 50;
    c.n_traj = state.range(0);
    c.seed = 3;
    for (auto _ : state) {
        auto res = parallel ? fock::mcwf_run(model, c) : fock::mcwf_run_serial(model, c);
        benchmark::DoNotOptimize(res.sample_count);
    }
    state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
}

}  // namespace

BENCHMARK(drift_reference)->Arg(4)->Arg(10)->Arg(40);
BENCHMARK(drift_kernel)->Arg(4)->Arg(10)->Arg(40);
BENCHMARK(ensemble<false>)->Name("ensemble/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(ensemble<true>)->Name("ensemble/openmp")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(mcwf<false>)->Name("mcwf/serial")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(mcwf<true>)->Name("mcwf/openmp")->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
