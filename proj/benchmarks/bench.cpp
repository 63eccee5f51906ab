#include "nhdyn/evolution.hpp"
#include "nhdyn/geometry.hpp"
#include "nhdyn/linalg.hpp"
#include "nhdyn/models.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace nhdyn;

static void BM_SchurDecompose(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> d;
    CMatrix H(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) H(i, j) = cplx(d(rng), d(rng));
    for (auto _ : state) benchmark::DoNotOptimize(schur_decompose(H));
}
BENCHMARK(BM_SchurDecompose)->Arg(2)->Arg(3)->Arg(8)->Arg(32);

static void BM_SampleTrajectory(benchmark::State& state) {
    const auto m = ep_model({});
    for (auto _ : state) benchmark::DoNotOptimize(sample_trajectory(m, 1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SampleTrajectory)->Arg(1024)->Arg(4096);

static void BM_IntegrateExact(benchmark::State& state) {
    const auto m = ep_model({});
    const auto g = sample_trajectory(m, 1.0, 256);
    const CVector psi0 = g.basis[0].chi.col(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate_exact(m, psi0, 1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_IntegrateExact)->Arg(4096)->Arg(16384);

static void BM_Evolve2x2(benchmark::State& state) {
    const auto g = sample_trajectory(ep_model({}), 1.0, 4096);
    const CVector psi0 = g.basis[0].chi.col(0);
    const auto tier = static_cast<Tier>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(evolve_2x2(g, psi0, tier));
}
BENCHMARK(BM_Evolve2x2)
    ->Arg(static_cast<int>(Tier::Leading))
    ->Arg(static_cast<int>(Tier::Subleading))
    ->Arg(static_cast<int>(Tier::Full));

static void BM_EvolveNxN(benchmark::State& state) {
    const auto g = sample_trajectory(three_level_model(50.0), 1.0, 4096);
    const CVector psi0 = g.basis[0].chi.col(0);
    EngineOptions opt;
    opt.order = 3;
    for (auto _ : state) benchmark::DoNotOptimize(evolve_nxn(g, psi0, Tier::Full, opt));
}
BENCHMARK(BM_EvolveNxN);
BENCHMARK_MAIN();
