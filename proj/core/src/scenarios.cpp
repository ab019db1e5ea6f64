#include "mfcbf/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mfcbf/error.hpp"

namespace mfcbf {

namespace {

const TorusPoint kOrigin = TorusPoint::wrap(0.0, 0.0);

TorusPoint uniform_point(Rng& rng) {
    return TorusPoint::wrap(rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi));
}

}  // namespace

// ------------------------------------------------------------------ placement

bool satisfies_rules(const ObstacleSet& obs, const PlacementRules& rules) {
    const double min_center_gap = 2.0 * rules.radius + rules.min_boundary_gap;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (wrapped_distance(obs.centers[i], kOrigin) < rules.min_center_distance_from_origin) {
            return false;
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (wrapped_distance(obs.centers[i], obs.centers[j]) < min_center_gap) return false;
        }
    }
    return true;
}

ObstacleSet place_obstacles(const PlacementRules& rules, Rng& rng) {
    ObstacleSet obs;
    obs.radius = rules.radius;
    const double min_center_gap = 2.0 * rules.radius + rules.min_boundary_gap;
    std::size_t rejections = 0;
    while (obs.centers.size() < rules.count) {
        const TorusPoint c = uniform_point(rng);
        bool ok = wrapped_distance(c, kOrigin) >= rules.min_center_distance_from_origin;
        for (std::size_t j = 0; ok && j < obs.centers.size(); ++j) {
            ok = wrapped_distance(c, obs.centers[j]) >= min_center_gap;
        }
        if (ok) {
            obs.centers.push_back(c);
        } else if (++rejections > rules.max_rejections) {
            throw Error(ErrorKind::kPlacementInfeasible,
                        "place_obstacles: exceeded " + std::to_string(rules.max_rejections) +
                            " rejections with " + std::to_string(obs.centers.size()) + " of " +
                            std::to_string(rules.count) + " disks placed");
        }
    }
    return obs;
}

// ------------------------------------------------------------------- coverage

PlacementRules CoverageParams::placement_rules() const {
    PlacementRules r;
    r.count = obstacle_count;
    r.radius = obstacle_radius;
    r.min_boundary_gap = obstacle_gap;
    r.min_center_distance_from_origin = support_radius + lambda;
    return r;
}

Population sample_uniform_disk(std::size_t n, double radius, Rng& rng) {
    Population out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double rho = radius * std::sqrt(rng.uniform(0.0, 1.0));
        const double theta = rng.uniform(0.0, kTwoPi);
        out.push_back(TorusPoint::wrap(rho * std::cos(theta), rho * std::sin(theta)));
    }
    return out;
}

CoverageScenario::CoverageScenario(CoverageParams params, ObstacleSet obstacles,
                                   Population initial)
    : params_(std::move(params)), obstacles_(std::move(obstacles)) {
    if (initial.empty()) throw Error(ErrorKind::kInvalidInput, "coverage: no agents");
    potential_ = build_potential(obstacles_, GaussKernelSpec{params_.sigma}, params_.potential);
    initial_.populations.push_back(std::move(initial));
}

std::vector<double> CoverageScenario::barriers(const SimState& state) const {
    return {barrier_value(state.populations[0], potential_, params_.barrier(), state.time)};
}

std::vector<Vec2> coverage_nominal_control(const Population& agents) {
    return std::vector<Vec2>(agents.size(), Vec2::Zero());
}

StepPlan CoverageScenario::plan_step(const SimState& state, bool filter_enabled,
                                     double /*dt*/) const {
    const Population& agents = state.populations[0];
    StepPlan plan;
    std::vector<Vec2> nominal = coverage_nominal_control(agents);
    if (!filter_enabled || obstacles_.empty()) {
        plan.velocities.push_back(std::move(nominal));
        return plan;
    }
    const LinearConstraint c = assemble_direct_constraint(agents, potential_, params_.barrier(),
                                                          params_.diffusion, state.time);
    const FilterReport report = apply_safety_filter(stack(nominal), std::span(&c, 1));
    plan.velocities.push_back(unstack(report.corrected));
    plan.deviation = report.deviation;
    plan.infeasible = report.infeasible;
    return plan;
}

void CoverageScenario::fill_metrics(const SimState& state, MetricRow& row) const {
    const Population& agents = state.populations[0];
    row.barrier_leaders = barrier_value(agents, potential_, params_.barrier(), state.time);
    row.frac_in_leaders = fraction_inside(agents, obstacles_, state.time);
}

std::unique_ptr<CoverageScenario> init_coverage(const CoverageParams& params, Rng& rng,
                                                const ObstacleSet* fixed_layout) {
    constexpr int kMaxAttempts = 100;
    const PlacementRules rules = params.placement_rules();
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        ObstacleSet obs = fixed_layout ? *fixed_layout : place_obstacles(rules, rng);
        Population agents = sample_uniform_disk(params.agents, params.support_radius, rng);
        auto scenario =
            std::make_unique<CoverageScenario>(params, std::move(obs), std::move(agents));
        if (scenario->barriers(scenario->initial_state())[0] > 0.0) return scenario;
    }
    throw Error(ErrorKind::kSetup, "init_coverage: could not reach H(0) > 0");
}

// ---------------------------------------------------------------- shepherding

double von_mises_density(const TorusPoint& x, const VonMisesTarget& target) {
    return std::exp(target.k1 * std::cos(x.x1()) + target.k2 * std::cos(x.x2()) +
                    std::cos(x.x1() - x.x2()));
}

double von_mises_normalizer(const VonMisesTarget& target, std::size_t resolution) {
    const double h = kTwoPi / static_cast<double>(resolution);
    double sum = 0.0;
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            sum += von_mises_density(TorusPoint::wrap(-kPi + h * static_cast<double>(i),
                                                      -kPi + h * static_cast<double>(j)),
                                     target);
        }
    }
    return sum * h * h;
}

std::vector<Vec2> follower_drift(std::span<const TorusPoint> followers,
                                 std::span<const TorusPoint> leaders, const RepulsionSpec& rep) {
    std::vector<Vec2> out(followers.size(), Vec2::Zero());
    if (leaders.empty()) return out;
    const double inv = 1.0 / static_cast<double>(leaders.size());
    for (std::size_t k = 0; k < followers.size(); ++k) {
        Vec2 v = Vec2::Zero();
        for (const TorusPoint& leader : leaders) {
            v += repulsion_from_displacement(wrapped_displacement(followers[k], leader).d,
                                             rep.length_scale)
                     .value;
        }
        out[k] = inv * v;
    }
    return out;
}

std::vector<Vec2> GreedyRayOffsetController::leader_controls(
    std::span<const TorusPoint> leaders, std::span<const TorusPoint> followers) const {
    const HerdingGains& g = gains_;
    std::vector<Vec2> u(leaders.size(), Vec2::Zero());

    std::vector<std::size_t> order;
    std::vector<double> dist(followers.size());
    for (std::size_t k = 0; k < followers.size(); ++k) {
        dist[k] = wrapped_distance(followers[k], kOrigin);
        if (dist[k] > g.engage_radius) order.push_back(k);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });

    std::vector<bool> busy(leaders.size(), false);
    std::size_t assigned = 0;
    for (std::size_t k : order) {
        if (assigned == leaders.size()) break;
        std::size_t best = leaders.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < leaders.size(); ++j) {
            if (busy[j]) continue;
            const double d = wrapped_distance(leaders[j], followers[k]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        busy[best] = true;
        ++assigned;
        const Vec2 f = wrapped_displacement(followers[k], kOrigin).d;
        const Vec2 ray = dist[k] > 0.0 ? Vec2(f / dist[k]) : Vec2(1.0, 0.0);
        const TorusPoint target = TorusPoint::wrap(f + g.offset * ray);
        u[best] = g.k_p * wrapped_displacement(target, leaders[best]).d;
    }

    for (std::size_t j = 0; j < leaders.size(); ++j) {
        if (busy[j]) continue;
        const Vec2 x = wrapped_displacement(leaders[j], kOrigin).d;
        const double theta = std::atan2(x.y(), x.x()) + g.orbit_step;
        const TorusPoint station =
            TorusPoint::wrap(g.orbit_radius * std::cos(theta), g.orbit_radius * std::sin(theta));
        u[j] = g.k_p * wrapped_displacement(station, leaders[j]).d;
    }
    return u;
}

std::vector<Vec2> shepherd_nominal_control(std::span<const TorusPoint> leaders,
                                           std::span<const TorusPoint> followers,
                                           const HerdingGains& gains) {
    return GreedyRayOffsetController(gains).leader_controls(leaders, followers);
}

PlacementRules ShepherdingParams::placement_rules() const {
    PlacementRules r;
    r.count = obstacle_count;
    r.radius = obstacle_radius;
    r.min_boundary_gap = lambda_obstacles;
    r.min_center_distance_from_origin = goal_radius + lambda;
    return r;
}

ShepherdingScenario::ShepherdingScenario(ShepherdingParams params, ObstacleSet obstacles,
                                         Population leaders, Population followers,
                                         std::shared_ptr<const LeaderController> controller)
    : params_(std::move(params)), obstacles_(std::move(obstacles)),
      controller_(std::move(controller)) {
    if (leaders.empty() || followers.empty()) {
        throw Error(ErrorKind::kInvalidInput, "shepherding: both populations must be nonempty");
    }
    RepulsionSpec{params_.repulsion_length}.validate();
    if (!controller_) controller_ = std::make_shared<GreedyRayOffsetController>(params_.gains);
    potential_ = build_potential(obstacles_, GaussKernelSpec{params_.sigma}, params_.potential);
    initial_.populations.push_back(std::move(leaders));
    initial_.populations.push_back(std::move(followers));
}

std::vector<double> ShepherdingScenario::barriers(const SimState& state) const {
    return {barrier_value(state.populations[0], potential_, params_.leader_barrier(), state.time),
            barrier_value(state.populations[1], potential_, params_.follower_barrier(),
                          state.time)};
}

StepPlan ShepherdingScenario::plan_step(const SimState& state, bool filter_enabled,
                                        double dt) const {
    const Population& leaders = state.populations[0];
    const Population& followers = state.populations[1];
    const RepulsionSpec rep{params_.repulsion_length};

    StepPlan plan;
    std::vector<Vec2> nominal = controller_->leader_controls(leaders, followers);
    std::vector<Vec2> drift = follower_drift(followers, leaders, rep);
    if (filter_enabled && !obstacles_.empty()) {
        const LinearConstraint constraints[2] = {
            assemble_direct_constraint(leaders, potential_, params_.leader_barrier(),
                                       params_.leader_diffusion, state.time),
            assemble_follower_constraint(followers, leaders, rep, potential_,
                                         params_.follower_barrier(),
                                         params_.follower_diffusion, dt, state.time),
        };
        const FilterReport report = apply_safety_filter(stack(nominal), constraints);
        nominal = unstack(report.corrected);
        plan.deviation = report.deviation;
        plan.infeasible = report.infeasible;
    }
    plan.velocities.push_back(std::move(nominal));
    plan.velocities.push_back(std::move(drift));
    return plan;
}

double fraction_in_goal(std::span<const TorusPoint> positions, double radius) {
    if (positions.empty()) return 0.0;
    std::size_t count = 0;
    for (const TorusPoint& p : positions) count += wrapped_distance(p, kOrigin) <= radius ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(positions.size());
}

void ShepherdingScenario::fill_metrics(const SimState& state, MetricRow& row) const {
    const Population& leaders = state.populations[0];
    const Population& followers = state.populations[1];
    row.barrier_leaders =
        barrier_value(leaders, potential_, params_.leader_barrier(), state.time);
    row.barrier_followers =
        barrier_value(followers, potential_, params_.follower_barrier(), state.time);
    row.frac_in_leaders = fraction_inside(leaders, obstacles_, state.time);
    row.frac_in_followers = fraction_inside(followers, obstacles_, state.time);
    row.frac_goal = fraction_in_goal(followers, params_.goal_radius);
}

Population sample_uniform_excluding(std::size_t n, const ObstacleSet& obs, double exclusion,
                                    Rng& rng) {
    Population out;
    out.reserve(n);
    while (out.size() < n) {
        const TorusPoint p = uniform_point(rng);
        bool ok = true;
        for (const TorusPoint& c : obs.centers) {
            if (wrapped_distance(p, c) < exclusion) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(p);
    }
    return out;
}

std::unique_ptr<ShepherdingScenario> init_shepherding(
    const ShepherdingParams& params, Rng& rng, const ObstacleSet* fixed_layout,
    std::shared_ptr<const LeaderController> controller) {
    constexpr int kMaxAttempts = 100;
    const PlacementRules rules = params.placement_rules();
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        ObstacleSet obs = fixed_layout ? *fixed_layout : place_obstacles(rules, rng);
        Population leaders = sample_uniform_excluding(params.leaders, obs, params.lambda_init, rng);
        Population followers =
            sample_uniform_excluding(params.followers, obs, params.lambda_init, rng);
        auto scenario = std::make_unique<ShepherdingScenario>(
            params, std::move(obs), std::move(leaders), std::move(followers), controller);
        const std::vector<double> h0 = scenario->barriers(scenario->initial_state());
        if (h0[0] > 0.0 && h0[1] > 0.0) return scenario;
    }
    throw Error(ErrorKind::kSetup, "init_shepherding: could not reach H_L(0), H_F(0) > 0");
}

}  // namespace mfcbf
