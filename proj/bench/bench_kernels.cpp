// Serial reference vs OpenMP backend on the ensemble kernels.
// Run with --benchmark_counters_tabular=true for a compact table.

#include <benchmark/benchmark.h>

#include <vector>

#include "naggs/ensemble_kernels.hpp"
#include "naggs/problems.hpp"
#include "naggs/sde_lab.hpp"

namespace {

using naggs::Backend;

naggs::QuadraticEnsembleSpec quadratic_spec(naggs::EnsembleMethod method, std::size_t n_traj) {
    const auto q = naggs::make_test_matrix(1.0, 1.9, 3, 1);
    naggs::QuadraticEnsembleSpec spec;
    spec.A = q.A;
    spec.x_star = naggs::Vector(3, 5.0);
    spec.method = method;
    switch (method) {
        case naggs::EnsembleMethod::nag_gs: spec.alpha = 5.0; break;
        case naggs::EnsembleMethod::nag_fi: spec.alpha = 5000.0; break;
        case naggs::EnsembleMethod::gf_euler: spec.alpha = 0.5; break;
    }
    spec.sigma = 1.0;
    spec.n_traj = n_traj;
    spec.n_steps = 100;
    spec.record_steps = {0, 50, 100};
    spec.seed = 7;
    return spec;
}

template <Backend B>
void BM_QuadraticEnsemble(benchmark::State& state) {
    const auto method = static_cast<naggs::EnsembleMethod>(state.range(1));
    const auto spec = quadratic_spec(method, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto res = naggs::simulate_quadratic_ensemble(spec, B);
        benchmark::DoNotOptimize(res.final_x.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<int64_t>(spec.n_steps));
    state.SetLabel(naggs::method_name(method));
}

template <Backend B>
void BM_EulerMaruyama(benchmark::State& state) {
    const std::vector<double> x0(static_cast<std::size_t>(state.range(0)), 1.0);
    for (auto _ : state) {
        auto ens = naggs::euler_maruyama_gf([](double x) { return x * x * x - x; }, x0, 1e-2, 0.5, 200, 3, B);
        benchmark::DoNotOptimize(ens.positions.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}

void quadratic_args(benchmark::internal::Benchmark* b) {
    for (int method : {0, 1, 2}) {
        for (int n : {2000, 20000}) b->Args({n, method});
    }
}

}  // namespace

BENCHMARK(BM_QuadraticEnsemble<Backend::serial>)->Apply(quadratic_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadraticEnsemble<Backend::openmp>)->Apply(quadratic_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EulerMaruyama<Backend::serial>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EulerMaruyama<Backend::openmp>)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
