#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "chemolab/diagnostics.hpp"
#include "chemolab/grid.hpp"
#include "chemolab/linear_solver.hpp"
#include "chemolab/solver.hpp"

using namespace chemolab;

namespace {

Params params() {
    Params p;
    p.chi = 0.9;
    p.beta = 0.9;
    return p;
}

State bump_state(int n) {
    const Grid g = build_grid(n, n, 1.0, 1.0);
    ScalarField u = sample(g, [](double x, double y) {
        return std::exp(-((x - 0.3) * (x - 0.3) + (y - 0.6) * (y - 0.6)) / 0.0225);
    });
    ScalarField w = sample(g, [](double x, double y) {
        return 0.25 * (1.0 - std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y));
    });
    return State{std::move(u), std::move(w), 0.0, Formulation::transformed};
}

void BM_Laplacian(benchmark::State& st) {
    const State s = bump_state(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(laplacian(s.u));
    st.SetItemsProcessed(st.iterations() * static_cast<long long>(s.u.size()));
}
BENCHMARK(BM_Laplacian)->Arg(64)->Arg(128)->Arg(256);

void BM_ImplicitDiffusion(benchmark::State& st) {
    const State s = bump_state(static_cast<int>(st.range(0)));
    ScalarField x;
    for (auto _ : st) {
        const CgResult r = solve_implicit_diffusion(s.u, 1e-2, x);
        benchmark::DoNotOptimize(r);
        st.counters["cg_iterations"] = r.iterations;
    }
}
BENCHMARK(BM_ImplicitDiffusion)->Arg(64)->Arg(128)->Arg(256);

void BM_Step(benchmark::State& st) {
    const State s = bump_state(static_cast<int>(st.range(0)));
    const Params p = params();
    for (auto _ : st) benchmark::DoNotOptimize(step(s, p, 1e-3));
}
BENCHMARK(BM_Step)->Arg(64)->Arg(128)->Arg(256);

void BM_Record(benchmark::State& st) {
    const State s = bump_state(static_cast<int>(st.range(0)));
    const Params p = params();
    for (auto _ : st) benchmark::DoNotOptimize(record(s, p, 0.5));
}
BENCHMARK(BM_Record)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
