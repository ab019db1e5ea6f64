#include "mfcbf/cbf_filter.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mfcbf {

StackedVector stack(std::span<const Vec2> controls) {
    StackedVector u(2 * static_cast<Eigen::Index>(controls.size()));
    for (std::size_t k = 0; k < controls.size(); ++k) {
        u.segment<2>(2 * static_cast<Eigen::Index>(k)) = controls[k];
    }
    return u;
}

std::vector<Vec2> unstack(const StackedVector& u) {
    std::vector<Vec2> out(static_cast<std::size_t>(u.size() / 2));
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = u.segment<2>(2 * static_cast<Eigen::Index>(k));
    }
    return out;
}

LinearConstraint assemble_direct_constraint(std::span<const TorusPoint> positions,
                                            const ObstaclePotential& pot,
                                            const BarrierSpec& spec, double diffusion,
                                            double t) {
    if (positions.empty()) {
        throw Error(ErrorKind::kInvalidInput, "assemble_direct_constraint: empty population");
    }
    if (diffusion < 0.0) {
        throw Error(ErrorKind::kInvalidInput, "assemble_direct_constraint: D must be >= 0");
    }
    const double n = static_cast<double>(positions.size());
    LinearConstraint c;
    c.a = StackedVector::Zero(2 * static_cast<Eigen::Index>(positions.size()));
    double overlap = 0.0, lap = 0.0, dt = 0.0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const PotentialSample s = pot.eval(positions[k], t);
        c.a.segment<2>(2 * static_cast<Eigen::Index>(k)) = -s.grad / n;
        overlap += s.value;
        lap += s.laplacian;
        dt += s.dt;
    }
    const double h = spec.epsilon - overlap / n;
    c.r = diffusion * lap / n + dt / n - spec.gamma * h;
    return c;
}

LinearConstraint assemble_follower_constraint(std::span<const TorusPoint> follower_positions,
                                              std::span<const TorusPoint> leader_positions,
                                              const RepulsionSpec& rep,
                                              const ObstaclePotential& pot,
                                              const BarrierSpec& spec, double diffusion,
                                              double dt, double t) {
    if (follower_positions.empty() || leader_positions.empty()) {
        throw Error(ErrorKind::kInvalidInput, "assemble_follower_constraint: empty population");
    }
    if (!(dt > 0.0)) {
        throw Error(ErrorKind::kInvalidInput, "assemble_follower_constraint: dt must be > 0");
    }
    const double nf = static_cast<double>(follower_positions.size());
    const double nl = static_cast<double>(leader_positions.size());
    LinearConstraint c;
    c.a = StackedVector::Zero(2 * static_cast<Eigen::Index>(leader_positions.size()));

    double overlap = 0.0, lap = 0.0, dtc = 0.0, drift_term = 0.0;
    for (const TorusPoint& xf : follower_positions) {
        const PotentialSample s = pot.eval(xf, t);
        overlap += s.value;
        lap += s.laplacian;
        dtc += s.dt;
        if (s.grad.x() == 0.0 && s.grad.y() == 0.0) continue;
        Vec2 drift = Vec2::Zero();
        for (std::size_t j = 0; j < leader_positions.size(); ++j) {
            const RepulsionSample g = repulsion_from_displacement(
                wrapped_displacement(xf, leader_positions[j]).d, rep.length_scale);
            drift += g.value;
            // g(x_f - x_j - u_j dt) ~ g - dt J u_j, so -grad C . v_F gains +dt (J^T grad C) . u_j / N_L
            c.a.segment<2>(2 * static_cast<Eigen::Index>(j)) +=
                g.jacobian_x.transpose() * s.grad;
        }
        drift_term += s.grad.dot(drift / nl);
    }
    c.a *= dt / (nf * nl);
    const double h = spec.epsilon - overlap / nf;
    c.r = diffusion * lap / nf + dtc / nf - spec.gamma * h + drift_term / nf;
    return c;
}

StackedVector project_halfspace(const StackedVector& u, const LinearConstraint& c) {
    if (c.a.size() != u.size()) {
        throw Error(ErrorKind::kInvalidInput, "project_halfspace: dimension mismatch");
    }
    const double margin = c.margin(u);
    if (margin >= 0.0) return u;
    const double norm2 = c.a.squaredNorm();
    if (norm2 == 0.0) {
        throw InfeasibleConstraintError("project_halfspace: a = 0 with r > 0", 0, -margin);
    }
    return u + (-margin / norm2) * c.a;
}

namespace {

std::size_t worst_violated(const StackedVector& u, std::span<const LinearConstraint> cs,
                           double* violation) {
    std::size_t worst = 0;
    double worst_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double norm = cs[i].a.norm();
        const double v = norm > 0.0 ? -cs[i].margin(u) / norm
                                    : (cs[i].r > 0.0 ? std::numeric_limits<double>::infinity()
                                                     : -std::numeric_limits<double>::infinity());
        if (v > worst_v) {
            worst_v = v;
            worst = i;
        }
    }
    *violation = worst_v;
    return worst;
}

}  // namespace

StackedVector project_polytope(const StackedVector& u, std::span<const LinearConstraint> cs) {
    if (cs.size() > kMaxPolytopeConstraints) {
        throw Error(ErrorKind::kInvalidInput, "project_polytope: at most 8 constraints");
    }
    for (const LinearConstraint& c : cs) {
        if (c.a.size() != u.size()) {
            throw Error(ErrorKind::kInvalidInput, "project_polytope: dimension mismatch");
        }
    }
    const std::size_t m = cs.size();
    double scale = 1.0;
    for (const LinearConstraint& c : cs) scale = std::max(scale, std::abs(c.r));
    const double tol = 1e-12 * scale;

    auto feasible = [&](const StackedVector& v) {
        for (const LinearConstraint& c : cs) {
            if (c.margin(v) < -tol * std::max(1.0, c.a.norm() * v.norm())) return false;
        }
        return true;
    };
    if (feasible(u)) return u;

    // candidate active sets, smallest first; constraints with a = 0 never bind
    std::vector<unsigned> subsets;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        bool usable = true;
        for (std::size_t i = 0; i < m; ++i) {
            if ((mask >> i & 1u) && cs[i].a.squaredNorm() == 0.0) usable = false;
        }
        if (usable) subsets.push_back(mask);
    }
    std::stable_sort(subsets.begin(), subsets.end(), [](unsigned a, unsigned b) {
        return __builtin_popcount(a) < __builtin_popcount(b);
    });

    for (unsigned mask : subsets) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask >> i & 1u) idx.push_back(i);
        }
        const auto k = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd gram(k, k);
        Eigen::VectorXd rhs(k);
        for (Eigen::Index p = 0; p < k; ++p) {
            const LinearConstraint& cp = cs[idx[static_cast<std::size_t>(p)]];
            rhs(p) = -cp.margin(u);
            for (Eigen::Index q = 0; q <= p; ++q) {
                const double g = cp.a.dot(cs[idx[static_cast<std::size_t>(q)]].a);
                gram(p, q) = g;
                gram(q, p) = g;
            }
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
        if (qr.rank() < k) continue;
        const Eigen::VectorXd lambda = qr.solve(rhs);
        if ((lambda.array() < -1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff())).any()) {
            continue;
        }
        StackedVector candidate = u;
        for (Eigen::Index p = 0; p < k; ++p) {
            candidate += lambda(p) * cs[idx[static_cast<std::size_t>(p)]].a;
        }
        if (feasible(candidate)) return candidate;
    }

    double violation = 0.0;
    const std::size_t worst = worst_violated(u, cs, &violation);
    throw InfeasibleConstraintError(
        "project_polytope: empty intersection (most violated constraint " +
            std::to_string(worst) + ")",
        worst, violation);
}

FilterReport apply_safety_filter(const StackedVector& nominal,
                                 std::span<const LinearConstraint> cs) {
    FilterReport report;
    report.active.assign(cs.size(), false);
    try {
        report.corrected = cs.size() == 1 ? project_halfspace(nominal, cs[0])
                                          : project_polytope(nominal, cs);
    } catch (const InfeasibleConstraintError&) {
        report.corrected = nominal;
        report.infeasible = true;
        return report;
    }
    const double n = std::max<double>(1.0, static_cast<double>(nominal.size() / 2));
    report.deviation = (report.corrected - nominal).squaredNorm() / n;
    if (report.deviation > 0.0) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const double slack = cs[i].margin(report.corrected);
            report.active[i] = slack <= 1e-9 * std::max(1.0, std::abs(cs[i].r));
        }
    }
    return report;
}

Vec2 micro_cbf_filter(const Vec2& u, double h_value, const Vec2& h_grad, double h_lap,
                      double diffusion, double gamma) {
    if (diffusion < 0.0) throw Error(ErrorKind::kInvalidInput, "micro_cbf_filter: D < 0");
    const double bound = -gamma * h_value - diffusion * h_lap;
    const double margin = h_grad.dot(u) - bound;
    if (margin >= 0.0) return u;
    const double norm2 = h_grad.squaredNorm();
    if (norm2 == 0.0) {
        throw InfeasibleConstraintError("micro_cbf_filter: grad h = 0 with violated bound", 0,
                                        -margin);
    }
    return u + (-margin / norm2) * h_grad;
}

double barrier_rate_estimate(std::span<const TorusPoint> positions,
                             std::span<const Vec2> velocities, const ObstaclePotential& pot,
                             double diffusion, double t) {
    if (positions.size() != velocities.size()) {
        throw Error(ErrorKind::kInvalidInput, "barrier_rate_estimate: size mismatch");
    }
    if (positions.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const PotentialSample s = pot.eval(positions[k], t);
        sum += s.grad.dot(velocities[k]) + diffusion * s.laplacian + s.dt;
    }
    return -sum / static_cast<double>(positions.size());
}

}  // namespace mfcbf
