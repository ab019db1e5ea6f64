#include <benchmark/benchmark.h>

#include <vector>

#include "mfcbf/cbf_filter.hpp"
#include "mfcbf/obstacle.hpp"
#include "mfcbf/particle_sim.hpp"
#include "mfcbf/scenarios.hpp"

using namespace mfcbf;

namespace {

ObstacleSet layout() {
    Rng rng(1);
    return place_obstacles(CoverageParams{}.placement_rules(), rng);
}

Population agents(std::size_t n) {
    Rng rng(2);
    Population p;
    for (std::size_t i = 0; i < n; ++i) p.push_back(TorusPoint::wrap(rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi)));
    return p;
}

void BM_PotentialEval(benchmark::State& state, PotentialBackend backend) {
    const ObstaclePotential pot =
        build_potential(layout(), GaussKernelSpec{0.2},
                        PotentialOptions{static_cast<std::size_t>(state.range(0)), DensityNormalization::kPerDisk, backend});
    const Population xs = agents(200);
    for (auto _ : state) benchmark::DoNotOptimize(potential_eval_all(pot, xs, 0.0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK_CAPTURE(BM_PotentialEval, radial_table, PotentialBackend::kRadialTable)->Arg(256);
BENCHMARK_CAPTURE(BM_PotentialEval, quadrature, PotentialBackend::kQuadrature)->Arg(256)->Arg(1024);

void BM_DirectConstraint(benchmark::State& state) {
    const ObstaclePotential pot = build_potential(
        layout(), GaussKernelSpec{0.2}, PotentialOptions{256, DensityNormalization::kPerDisk, PotentialBackend::kRadialTable});
    const Population xs = agents(static_cast<std::size_t>(state.range(0)));
    const BarrierSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(assemble_direct_constraint(xs, pot, spec, 0.05, 0.0));
}
BENCHMARK(BM_DirectConstraint)->Arg(200)->Arg(720);

void BM_FollowerConstraint(benchmark::State& state) {
    const ObstaclePotential pot = build_potential(
        layout(), GaussKernelSpec{0.25}, PotentialOptions{256, DensityNormalization::kPerDisk, PotentialBackend::kRadialTable});
    const Population followers = agents(200);
    Population leaders = agents(40);
    const BarrierSpec spec{0.01, 0.1, GaussKernelSpec{0.25}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            assemble_follower_constraint(followers, leaders, RepulsionSpec{1.0}, pot, spec, 0.005, 0.01, 0.0));
    }
}
BENCHMARK(BM_FollowerConstraint);

void BM_ProjectPolytope(benchmark::State& state) {
    Rng rng(3);
    const int n = 400;
    const auto m = static_cast<std::size_t>(state.range(0));
    std::vector<LinearConstraint> cs(m);
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = rng.normal();
    for (auto& c : cs) {
        c.a.resize(n);
        for (int i = 0; i < n; ++i) c.a(i) = rng.normal();
        c.r = c.a.dot(u) + 5.0;
    }
    for (auto _ : state) benchmark::DoNotOptimize(project_polytope(u, cs));
}
BENCHMARK(BM_ProjectPolytope)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_CoverageStep(benchmark::State& state) {
    CoverageParams params;
    params.agents = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    const auto sc = init_coverage(params, rng);
    SimState s = sc->initial_state();
    const std::vector<double> D = sc->diffusion();
    for (auto _ : state) {
        const StepPlan plan = sc->plan_step(s, true, 0.01);
        euler_maruyama_step(s, plan.velocities, D, 0.01, rng);
        s.time += 0.01;
    }
}
BENCHMARK(BM_CoverageStep)->Arg(200)->Arg(720);

void BM_ShepherdingStep(benchmark::State& state) {
    ShepherdingParams params;
    params.leaders = 40;
    params.followers = 200;
    params.repulsion_length = 1.0;
    Rng rng(5);
    const auto sc = init_shepherding(params, rng);
    SimState s = sc->initial_state();
    const std::vector<double> D = sc->diffusion();
    for (auto _ : state) {
        const StepPlan plan = sc->plan_step(s, true, 0.01);
        euler_maruyama_step(s, plan.velocities, D, 0.01, rng);
        s.time += 0.01;
    }
}
BENCHMARK(BM_ShepherdingStep);

}  // namespace

BENCHMARK_MAIN();
