#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mfcbf/obstacle.hpp"
#include "mfcbf/torus.hpp"

namespace mfcbf {

/// One generator stream per run. Seeded through SplitMix64 so that nearby
/// seeds (base_seed + run_index) give unrelated streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::mt19937_64& engine() { return engine_; }
    double uniform(double lo, double hi);
    double normal();

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

struct SimConfig {
    double dt = 0.01;
    double horizon = 50.0;
    std::uint64_t seed = 0;
    std::size_t record_stride = 10;
    /// Times at which full position/drift snapshots are stored.
    std::vector<double> snapshot_times;

    std::size_t steps() const;
    void validate() const;
};

using Population = std::vector<TorusPoint>;

struct SimState {
    std::vector<Population> populations;
    double time = 0.0;
};

/// x <- wrap(x + v dt + sqrt(2 D dt) xi), noise drawn population by population
/// in agent order; populations with D = 0 draw nothing.
void euler_maruyama_step(SimState& state, std::span<const std::vector<Vec2>> velocities,
                         std::span<const double> diffusion, double dt, Rng& rng);

inline constexpr double kBlank = std::numeric_limits<double>::quiet_NaN();

/// One recorded row; NaN marks a column that does not apply to the scenario.
struct MetricRow {
    double t = 0.0;
    double barrier_leaders = kBlank;
    double barrier_followers = kBlank;
    double frac_in_leaders = kBlank;
    double frac_in_followers = kBlank;
    double frac_goal = kBlank;
    double deviation = 0.0;
    std::size_t violations = 0;  // cumulative infeasibility events
};

struct Snapshot {
    double t = 0.0;
    std::vector<Population> positions;
    std::vector<std::vector<Vec2>> drifts;  // velocity actually applied to each agent
};

struct RunRecord {
    std::uint64_t seed = 0;
    bool filter_enabled = true;
    std::vector<std::string> population_names;
    ObstacleSet obstacles;
    std::vector<MetricRow> rows;
    std::vector<Snapshot> snapshots;

    std::size_t total_violations() const { return rows.empty() ? 0 : rows.back().violations; }
};

/// Controls chosen for one step.
struct StepPlan {
    std::vector<std::vector<Vec2>> velocities;  // one list per population
    double deviation = 0.0;
    bool infeasible = false;
};

/// A concrete experiment: obstacle layout, initial state and control law.
class ScenarioInstance {
public:
    virtual ~ScenarioInstance() = default;

    virtual std::vector<std::string> population_names() const = 0;
    virtual std::vector<double> diffusion() const = 0;
    virtual const ObstacleSet& obstacles() const = 0;
    virtual const SimState& initial_state() const = 0;

    /// Barrier values at the current state, one per filtered population.
    virtual std::vector<double> barriers(const SimState& state) const = 0;

    virtual StepPlan plan_step(const SimState& state, bool filter_enabled,
                               double dt) const = 0;

    /// Fills every column except t, deviation and violations.
    virtual void fill_metrics(const SimState& state, MetricRow& row) const = 0;
};

/// Euler-Maruyama rollout with per-step filtering and recording. Noise is
/// drawn from `rng` only. Throws kSetup when the filter is enabled and some
/// initial barrier is not positive.
RunRecord run_simulation(const ScenarioInstance& scenario, const SimConfig& config,
                         bool filter_enabled, Rng& rng);

}  // namespace mfcbf
