#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "mfcbf/error.hpp"
#include "mfcbf/obstacle.hpp"
#include "mfcbf/torus.hpp"

namespace mfcbf {

/// Stacked control vector [u_1^T, ..., u_N^T]^T.
using StackedVector = Eigen::VectorXd;

StackedVector stack(std::span<const Vec2> controls);
std::vector<Vec2> unstack(const StackedVector& u);

/// Halfspace a^T u >= r over a stacked control vector.
struct LinearConstraint {
    StackedVector a;
    double r = 0.0;

    /// a^T u - r; nonnegative iff u is feasible.
    double margin(const StackedVector& u) const { return a.dot(u) - r; }
};

/// Raised when no control satisfies the constraint set. `worst` indexes the
/// constraint with the largest normalized violation at the nominal input.
class InfeasibleConstraintError : public Error {
public:
    InfeasibleConstraintError(const std::string& what, std::size_t worst, double violation)
        : Error(ErrorKind::kInfeasibleConstraint, what), worst_(worst), violation_(violation) {}

    std::size_t worst() const { return worst_; }
    double violation() const { return violation_; }

private:
    std::size_t worst_;
    double violation_;
};

/// MF-CBF constraint for a directly actuated population with w = u and
/// H = epsilon - R_k, so that grad(delta_rho H) = -grad C:
///   a_k = -grad C(x_k) / N
///   r   = D mean(lap C) + mean(dC/dt) - gamma H
LinearConstraint assemble_direct_constraint(std::span<const TorusPoint> positions,
                                            const ObstaclePotential& pot,
                                            const BarrierSpec& spec, double diffusion, double t);

/// Barrier constraint of the follower population expressed over the stacked
/// leader controls. Leaders are advanced one Euler step under the candidate u,
/// the follower drift g * rho_L is linearized in u through the repulsion
/// jacobian, and the next-step follower barrier rate is bounded below by
/// -gamma H_F.
LinearConstraint assemble_follower_constraint(std::span<const TorusPoint> follower_positions,
                                              std::span<const TorusPoint> leader_positions,
                                              const RepulsionSpec& rep,
                                              const ObstaclePotential& pot,
                                              const BarrierSpec& spec, double diffusion,
                                              double dt, double t);

/// Minimal-norm correction onto a^T u >= r. Identity on the feasible set.
/// Throws InfeasibleConstraintError if a = 0 and r > 0.
StackedVector project_halfspace(const StackedVector& u, const LinearConstraint& c);

/// Exact Euclidean projection onto the intersection of at most 8 halfspaces by
/// active-set enumeration with KKT sign checks.
StackedVector project_polytope(const StackedVector& u, std::span<const LinearConstraint> cs);

inline constexpr std::size_t kMaxPolytopeConstraints = 8;

struct FilterReport {
    StackedVector corrected;
    std::vector<bool> active;
    double deviation = 0.0;  // (1/N) sum_k |u*_k - u_k|^2
    bool infeasible = false;
};

/// Projects the nominal control; on infeasibility the nominal control is
/// passed through and the report is flagged.
FilterReport apply_safety_filter(const StackedVector& nominal,
                                 std::span<const LinearConstraint> cs);

/// Single-agent stochastic CBF filter for drift f(z, u) = u: projects u onto
/// grad h . u >= -gamma h - D lap h.
Vec2 micro_cbf_filter(const Vec2& u, double h_value, const Vec2& h_grad, double h_lap,
                      double diffusion, double gamma);

/// Empirical dH/dt = -(1/N) sum_k [grad C(x_k) . v_k + D lap C(x_k) + dC/dt(x_k)].
double barrier_rate_estimate(std::span<const TorusPoint> positions,
                             std::span<const Vec2> velocities, const ObstaclePotential& pot,
                             double diffusion, double t);

}  // namespace mfcbf
