#include <benchmark/benchmark.h>

#include <cmath>

#include "bsfb/closed_form.hpp"
#include "bsfb/pde_solver.hpp"
#include "bsfb/reduction.hpp"
#include "bsfb/verification.hpp"

namespace {

using namespace bsfb;
namespace cf = bsfb::closed_form;

cf::SolutionBranch branch(cf::Family f) {
    cf::SolutionBranch br;
    br.family = f;
    br.c = f == cf::Family::euler_plus ? 1.0 : -1.0;
    return br;
}

void BM_EvaluateV(benchmark::State& state) {
    const auto br = branch(static_cast<cf::Family>(state.range(0)));
    double z = -4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cf::evaluate_v(br, z));
        z = z > 0.9 ? -4.0 : z + 1e-3;
    }
    state.SetLabel(cf::to_string(br.family));
}
BENCHMARK(BM_EvaluateV)
    ->Arg(static_cast<int>(cf::Family::euler_plus))
    ->Arg(static_cast<int>(cf::Family::trig1))
    ->Arg(static_cast<int>(cf::Family::three_piece));

void BM_CubicRoots(benchmark::State& state) {
    double z = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cf::cubic_roots_p(z, -1.0, cf::CubicForm::cubp));
        z = z > 2.0 ? -3.0 : z + 1e-3;
    }
}
BENCHMARK(BM_CubicRoots);

void BM_OdeResidualSweep(benchmark::State& state) {
    const auto br = branch(cf::Family::euler_plus);
    const auto pieces = verification::family_pieces(br, -5.0, 4.5);
    for (auto _ : state) benchmark::DoNotOptimize(verification::ode_residual_sweep(br, pieces).max_abs);
}
BENCHMARK(BM_OdeResidualSweep)->Unit(benchmark::kMillisecond);

void BM_IntegrateBranch(benchmark::State& state) {
    const auto p = reduction::ReducedParams::from_q(4.0, 1.0);
    const auto id = reduction::BranchId::make(reduction::Sign::minus, 4.0);
    const double y0 = cf::vz_plus(0.0, 1.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduction::integrate_branch(y0, 0.0, 2.0, id, p).ys.back());
    }
}
BENCHMARK(BM_IntegrateBranch)->Unit(benchmark::kMicrosecond);

void BM_PdeStep(benchmark::State& state) {
    GridSpec g;
    g.S_min = std::exp(-1.0);
    g.S_max = std::exp(1.0);
    g.nS = static_cast<int>(state.range(0));
    g.nT = g.nS;
    const auto params = ModelParams::with_feedback(1.0, 1.0, 1.0);
    const auto br = branch(cf::Family::euler_plus);
    std::vector<double> slice(g.nS);
    for (int i = 0; i < g.nS; ++i) slice[i] = cf::u_family(br, params, g.S(i), 0.0);
    const pde::Boundary bc{cf::u_family(br, params, g.S(0), g.dt()),
                           cf::u_family(br, params, g.S(g.nS - 1), g.dt())};
    for (auto _ : state) benchmark::DoNotOptimize(pde::step(slice, 0.0, g.dt(), g, params, bc));
}
BENCHMARK(BM_PdeStep)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
