#include <benchmark/benchmark.h>

#include "qlens/bae.hpp"
#include "qlens/rng.hpp"
#include "qlens/simulate.hpp"
#include "qlens/transfer.hpp"

using namespace qlens;

namespace {

SystemParams sized_system(Eigen::Index n, Eigen::Index m) {
    auto rng = make_engine(0xbe9c);
    return random_system(n, m, rng);
}

void BM_QuadratureRealization(benchmark::State& state) {
    const SystemParams p = sized_system(state.range(0), 2);
    for (auto _ : state) {
        auto r = quadrature_realization(p);
        benchmark::DoNotOptimize(r.A);
    }
}
BENCHMARK(BM_QuadratureRealization)->Arg(2)->Arg(4)->Arg(8);

void BM_CertifyZeroBlock(benchmark::State& state) {
    const SystemParams p = sized_system(state.range(0), 2);
    const auto r = quadrature_realization(p);
    for (auto _ : state) {
        auto cert = certify_zero_block(r, {Quad::Q, Quad::P}, 1e-8);
        benchmark::DoNotOptimize(cert.max_residual);
    }
}
BENCHMARK(BM_CertifyZeroBlock)->Arg(2)->Arg(4)->Arg(8);

void BM_TransferEvaluate(benchmark::State& state) {
    const SystemParams p = sized_system(state.range(0), 2);
    const auto r = quadrature_realization(p);
    Complex s(0.7, 1.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(r, s));
        s += Complex(1e-9, 0);  // defeat caching
    }
}
BENCHMARK(BM_TransferEvaluate)->Arg(2)->Arg(4)->Arg(8);

void BM_StochasticTrajectory(benchmark::State& state) {
    const SystemParams p = sized_system(2, 1);
    const auto r = quadrature_realization(p);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 1.0;
    cfg.ensemble = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto rec = stochastic_trajectories(r, cfg);
        benchmark::DoNotOptimize(rec.outputs.back());
    }
}
BENCHMARK(BM_StochasticTrajectory)->Arg(1)->Arg(8);

void BM_Analyze(benchmark::State& state) {
    auto rng = make_engine(0xfeed);
    const SystemParams p = random_system(3, 2, rng);
    for (auto _ : state) {
        auto report = analyze(p);
        benchmark::DoNotOptimize(report.predictions);
    }
}
BENCHMARK(BM_Analyze);

}  // namespace

BENCHMARK_MAIN();
