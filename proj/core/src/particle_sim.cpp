#include "mfcbf/particle_sim.hpp"

#include <cmath>
#include <string>

#include "mfcbf/error.hpp"

namespace mfcbf {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
}

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal() { return normal_(engine_); }

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorKind::kInvalidInput, "sim: dt must be > 0");
    if (!(horizon >= dt)) throw Error(ErrorKind::kInvalidInput, "sim: horizon must be >= dt");
    if (record_stride == 0) throw Error(ErrorKind::kInvalidInput, "sim: record_stride must be >= 1");
}

void euler_maruyama_step(SimState& state, std::span<const std::vector<Vec2>> velocities,
                         std::span<const double> diffusion, double dt, Rng& rng) {
    if (velocities.size() != state.populations.size() ||
        diffusion.size() != state.populations.size()) {
        throw Error(ErrorKind::kInvalidInput, "euler_maruyama_step: population count mismatch");
    }
    for (std::size_t p = 0; p < state.populations.size(); ++p) {
        Population& pop = state.populations[p];
        const std::vector<Vec2>& v = velocities[p];
        if (v.size() != pop.size()) {
            throw Error(ErrorKind::kInvalidInput, "euler_maruyama_step: velocity count mismatch");
        }
        if (diffusion[p] < 0.0) {
            throw Error(ErrorKind::kInvalidInput, "euler_maruyama_step: negative diffusion");
        }
        const double noise = std::sqrt(2.0 * diffusion[p] * dt);
        for (std::size_t k = 0; k < pop.size(); ++k) {
            if (!std::isfinite(v[k].x()) || !std::isfinite(v[k].y())) {
                throw Error(ErrorKind::kInvalidInput,
                            "euler_maruyama_step: non-finite velocity for agent " +
                                std::to_string(k) + " of population " + std::to_string(p));
            }
            Vec2 x = pop[k].coords() + v[k] * dt;
            if (noise > 0.0) {
                const double xi1 = rng.normal();
                const double xi2 = rng.normal();
                x += noise * Vec2(xi1, xi2);
            }
            pop[k] = TorusPoint::wrap(x);
        }
    }
    state.time += dt;
}

namespace {

std::vector<std::size_t> snapshot_steps(const SimConfig& config) {
    std::vector<std::size_t> out;
    for (double t : config.snapshot_times) {
        const auto step = static_cast<long long>(std::llround(t / config.dt));
        if (step >= 0 && static_cast<std::size_t>(step) <= config.steps()) {
            out.push_back(static_cast<std::size_t>(step));
        }
    }
    return out;
}

}  // namespace

RunRecord run_simulation(const ScenarioInstance& scenario, const SimConfig& config,
                         bool filter_enabled, Rng& rng) {
    config.validate();
    SimState state = scenario.initial_state();
    if (filter_enabled) {
        const std::vector<double> h0 = scenario.barriers(state);
        for (std::size_t i = 0; i < h0.size(); ++i) {
            if (!(h0[i] > 0.0)) {
                throw Error(ErrorKind::kSetup, "run_simulation: initial barrier " +
                                                   std::to_string(i) + " is not positive (H = " +
                                                   std::to_string(h0[i]) + ")");
            }
        }
    }

    RunRecord record;
    record.seed = config.seed;
    record.filter_enabled = filter_enabled;
    record.population_names = scenario.population_names();
    record.obstacles = scenario.obstacles();

    const std::vector<double> diffusion = scenario.diffusion();
    const std::vector<std::size_t> snaps = snapshot_steps(config);
    const std::size_t steps = config.steps();
    std::size_t violations = 0;

    for (std::size_t step = 0; step <= steps; ++step) {
        state.time = static_cast<double>(step) * config.dt;
        StepPlan plan = scenario.plan_step(state, filter_enabled, config.dt);
        if (plan.infeasible) ++violations;

        if (step % config.record_stride == 0) {
            MetricRow row;
            row.t = state.time;
            scenario.fill_metrics(state, row);
            row.deviation = plan.deviation;
            row.violations = violations;
            record.rows.push_back(row);
        }
        for (std::size_t s : snaps) {
            if (s == step) {
                record.snapshots.push_back(Snapshot{state.time, state.populations, plan.velocities});
            }
        }
        if (step == steps) break;
        euler_maruyama_step(state, plan.velocities, diffusion, config.dt, rng);
    }
    return record;
}

}  // namespace mfcbf
