#include <benchmark/benchmark.h>

#include <cmath>

#include "pidelab/assembly.hpp"
#include "pidelab/theta_scheme.hpp"

using namespace pidelab;

namespace {

LevyModel jump_model() {
    LevyModel m = LevyModel::diffusion(0.2);
    m.drift = [](double) { return 0.02; };
    m.jumps = JumpSpec::merton([](double t) { return 0.5 * (1.0 + t); }, -0.1, 0.15);
    return m;
}

void BM_AssembleStiffness(benchmark::State& state) {
    GalerkinSpace space({-1.0, 1.0}, static_cast<int>(state.range(0)), 1, -1.5);
    const LevyModel model = LevyModel::diffusion(0.2);
    for (auto _ : state)
        benchmark::DoNotOptimize(assemble_stiffness(space, model, 0.3).A);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleStiffness)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void BM_JumpMatrix(benchmark::State& state) {
    GalerkinSpace space({-1.0, 1.0}, static_cast<int>(state.range(0)), 1, -1.5);
    const JumpSpec jumps =
        JumpSpec::merton([](double) { return 0.8; }, -0.1, 0.15);
    for (auto _ : state)
        benchmark::DoNotOptimize(jump_matrix(space, jumps, 0.0));
}
BENCHMARK(BM_JumpMatrix)->Arg(32)->Arg(64)->Arg(128);

void BM_ThetaStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    GalerkinSpace space({-1.0, 1.0}, n, 1, -1.5);
    const LevyModel model = jump_model();
    const Vector u0 =
        space.l2_project([](double x) { return std::max(std::exp(x) - 1.0, 0.0); });
    auto zero = [dim = space.dim()](double) { return Vector::Zero(dim).eval(); };
    for (auto _ : state) {
        const ThetaRun run = run_theta_scheme_loads(space, model, zero, u0,
                                                    {1.0, 8}, {0.5, true, 0.9});
        benchmark::DoNotOptimize(run.trajectory.back());
    }
}
BENCHMARK(BM_ThetaStep)->Arg(64)->Arg(128)->Arg(256);

void BM_LambdaEstimate(benchmark::State& state) {
    GalerkinSpace space({0.0, 1.0}, static_cast<int>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(space.compute_lambda());
}
BENCHMARK(BM_LambdaEstimate)->Arg(32)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
