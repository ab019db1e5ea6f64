#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mfcbf/cbf_filter.hpp"
#include "mfcbf/obstacle.hpp"
#include "mfcbf/particle_sim.hpp"
#include "mfcbf/torus.hpp"

namespace mfcbf {

// ------------------------------------------------------------------ placement

struct PlacementRules {
    std::size_t count = 5;
    double radius = 0.5;
    /// Minimum wrapped distance between the boundaries of any two disks.
    double min_boundary_gap = 0.25;
    /// Every center keeps at least this wrapped distance from the origin.
    double min_center_distance_from_origin = 0.0;
    std::size_t max_rejections = 100000;
};

/// Sequential rejection sampling of uniform centers on the torus.
/// Throws kPlacementInfeasible after max_rejections rejected draws.
ObstacleSet place_obstacles(const PlacementRules& rules, Rng& rng);

/// True when the layout satisfies the gap/exclusion rules.
bool satisfies_rules(const ObstacleSet& obs, const PlacementRules& rules);

// ------------------------------------------------------------------- coverage

struct CoverageParams {
    std::size_t agents = 720;
    double diffusion = 0.05;
    double sigma = 0.2;
    double epsilon = 0.01;
    double gamma = 0.1;
    double support_radius = 1.0;
    /// Clearance between the initial support boundary and every disk center.
    double lambda = 0.75;
    std::size_t obstacle_count = 5;
    double obstacle_radius = 0.5;
    double obstacle_gap = 0.25;
    PotentialOptions potential{256, DensityNormalization::kPerDisk,
                               PotentialBackend::kRadialTable};

    PlacementRules placement_rules() const;
    BarrierSpec barrier() const { return BarrierSpec{epsilon, gamma, GaussKernelSpec{sigma}}; }
};

/// N points uniform on the disk of radius support_radius at the origin.
Population sample_uniform_disk(std::size_t n, double radius, Rng& rng);

class CoverageScenario final : public ScenarioInstance {
public:
    CoverageScenario(CoverageParams params, ObstacleSet obstacles, Population initial);

    std::vector<std::string> population_names() const override { return {"agents"}; }
    std::vector<double> diffusion() const override { return {params_.diffusion}; }
    const ObstacleSet& obstacles() const override { return obstacles_; }
    const SimState& initial_state() const override { return initial_; }
    std::vector<double> barriers(const SimState& state) const override;
    StepPlan plan_step(const SimState& state, bool filter_enabled, double dt) const override;
    void fill_metrics(const SimState& state, MetricRow& row) const override;

    const CoverageParams& params() const { return params_; }
    const ObstaclePotential& potential() const { return potential_; }

private:
    CoverageParams params_;
    ObstacleSet obstacles_;
    ObstaclePotential potential_;
    SimState initial_;
};

/// Places obstacles (unless a fixed layout is given), samples the initial
/// population and re-places the layout until H(0) > 0.
std::unique_ptr<CoverageScenario> init_coverage(const CoverageParams& params, Rng& rng,
                                                const ObstacleSet* fixed_layout = nullptr);

/// Zero velocity for every agent: diffusion alone spreads the population.
std::vector<Vec2> coverage_nominal_control(const Population& agents);

// ---------------------------------------------------------------- shepherding

struct VonMisesTarget {
    double k1 = 9.0;
    double k2 = 9.0;
};

/// Unnormalized exp(k1 cos x1 + k2 cos x2 + cos(x1 - x2)).
double von_mises_density(const TorusPoint& x, const VonMisesTarget& target);

/// Integral of the unnormalized density over the torus by periodic trapezoid
/// quadrature on a resolution^2 grid.
double von_mises_normalizer(const VonMisesTarget& target, std::size_t resolution = 256);

/// v_F(x_k) = (1/N_L) sum_j g({x_k, x_j}).
std::vector<Vec2> follower_drift(std::span<const TorusPoint> followers,
                                 std::span<const TorusPoint> leaders, const RepulsionSpec& rep);

struct HerdingGains {
    double k_p = 1.0;
    double offset = 1.3;         // distance behind the assigned follower
    double engage_radius = 0.8;  // followers closer than this to the origin are left alone
    double orbit_radius = 1.8;   // station circle for idle leaders
    double orbit_step = 0.3;    // angular lead along the station circle [rad]
};

/// Pluggable nominal law for the leaders.
class LeaderController {
public:
    virtual ~LeaderController() = default;
    virtual std::vector<Vec2> leader_controls(std::span<const TorusPoint> leaders,
                                              std::span<const TorusPoint> followers) const = 0;
};

/// Greedy ray-offset herding: the followers farthest from the goal (outside
/// it) are taken in decreasing distance and each is given the nearest free
/// leader, which steers proportionally to the point `offset` beyond the
/// follower on the ray from the goal center. Leaders left without a follower
/// circulate on the station circle.
class GreedyRayOffsetController final : public LeaderController {
public:
    explicit GreedyRayOffsetController(HerdingGains gains) : gains_(gains) {}

    std::vector<Vec2> leader_controls(std::span<const TorusPoint> leaders,
                                      std::span<const TorusPoint> followers) const override;

    const HerdingGains& gains() const { return gains_; }

private:
    HerdingGains gains_;
};

std::vector<Vec2> shepherd_nominal_control(std::span<const TorusPoint> leaders,
                                           std::span<const TorusPoint> followers,
                                           const HerdingGains& gains);

struct ShepherdingParams {
    std::size_t leaders = 100;
    std::size_t followers = 720;
    double follower_diffusion = 0.005;
    double leader_diffusion = 0.0;
    double sigma = 0.25;
    double epsilon_leaders = 0.013;
    double epsilon_followers = 0.01;
    double gamma = 0.1;
    double repulsion_length = 1.0;
    double goal_radius = 1.0;
    double lambda = 0.75;
    double lambda_obstacles = 0.25;
    double lambda_init = 0.75;
    std::size_t obstacle_count = 5;
    double obstacle_radius = 0.5;
    VonMisesTarget target;
    HerdingGains gains;
    PotentialOptions potential{256, DensityNormalization::kPerDisk,
                               PotentialBackend::kRadialTable};

    PlacementRules placement_rules() const;
    BarrierSpec leader_barrier() const {
        return BarrierSpec{epsilon_leaders, gamma, GaussKernelSpec{sigma}};
    }
    BarrierSpec follower_barrier() const {
        return BarrierSpec{epsilon_followers, gamma, GaussKernelSpec{sigma}};
    }
};

class ShepherdingScenario final : public ScenarioInstance {
public:
    ShepherdingScenario(ShepherdingParams params, ObstacleSet obstacles, Population leaders,
                        Population followers,
                        std::shared_ptr<const LeaderController> controller = nullptr);

    std::vector<std::string> population_names() const override {
        return {"leaders", "followers"};
    }
    std::vector<double> diffusion() const override {
        return {params_.leader_diffusion, params_.follower_diffusion};
    }
    const ObstacleSet& obstacles() const override { return obstacles_; }
    const SimState& initial_state() const override { return initial_; }
    std::vector<double> barriers(const SimState& state) const override;
    StepPlan plan_step(const SimState& state, bool filter_enabled, double dt) const override;
    void fill_metrics(const SimState& state, MetricRow& row) const override;

    const ShepherdingParams& params() const { return params_; }
    const ObstaclePotential& potential() const { return potential_; }

private:
    ShepherdingParams params_;
    ObstacleSet obstacles_;
    ObstaclePotential potential_;
    SimState initial_;
    std::shared_ptr<const LeaderController> controller_;
};

/// Uniform samples on the torus outside the balls of radius `exclusion`
/// around each obstacle center.
Population sample_uniform_excluding(std::size_t n, const ObstacleSet& obs, double exclusion,
                                    Rng& rng);

std::unique_ptr<ShepherdingScenario> init_shepherding(
    const ShepherdingParams& params, Rng& rng, const ObstacleSet* fixed_layout = nullptr,
    std::shared_ptr<const LeaderController> controller = nullptr);

/// Fraction of agents within `radius` (wrapped) of the origin.
double fraction_in_goal(std::span<const TorusPoint> positions, double radius);

}  // namespace mfcbf
