#pragma once

#include <Eigen/Core>
#include <numbers>

namespace mfcbf {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDomainArea = kTwoPi * kTwoPi;

/// Point on the periodic square [-pi, pi)^2. Only constructible through wrap().
class TorusPoint {
public:
    TorusPoint() = default;

    /// Maps a finite raw point onto its representative in [-pi, pi)^2.
    /// Throws Error(kInvalidInput) on non-finite components.
    static TorusPoint wrap(const Vec2& raw);
    static TorusPoint wrap(double x1, double x2) { return wrap(Vec2(x1, x2)); }

    const Vec2& coords() const { return p_; }
    double x1() const { return p_.x(); }
    double x2() const { return p_.y(); }

    /// Rigid translation followed by wrapping.
    TorusPoint shifted(const Vec2& delta) const { return wrap(p_ + delta); }

    friend bool operator==(const TorusPoint& a, const TorusPoint& b) {
        return a.p_.x() == b.p_.x() && a.p_.y() == b.p_.y();
    }

private:
    explicit TorusPoint(const Vec2& p) : p_(p) {}
    Vec2 p_ = Vec2::Zero();
};

/// Component-wise shortest signed displacement, each component in [-pi, pi].
struct TorusVector {
    Vec2 d = Vec2::Zero();

    double norm() const { return d.norm(); }
    double squared_norm() const { return d.squaredNorm(); }
};

/// Reduces a scalar angle into [-pi, pi).
double wrap_angle(double x);

/// Wrapped displacement x - y. A component whose raw difference is exactly
/// +-pi maps to -pi.
TorusVector wrapped_displacement(const TorusPoint& x, const TorusPoint& y);

inline double wrapped_distance(const TorusPoint& x, const TorusPoint& y) {
    return wrapped_displacement(x, y).norm();
}

struct GaussKernelSpec {
    double sigma = 0.2;

    void validate() const;
};

struct KernelSample {
    double value = 0.0;
    Vec2 grad_x = Vec2::Zero();
    double laplacian_x = 0.0;
};

/// Gaussian kernel of the wrapped displacement (nearest image only), with its
/// gradient and Laplacian in the first argument.
KernelSample gauss_kernel_eval(const TorusPoint& x, const TorusPoint& y,
                               const GaussKernelSpec& spec);

/// Same as gauss_kernel_eval but on a precomputed displacement d = {x, y}.
KernelSample gauss_kernel_from_displacement(const Vec2& d, double sigma);

struct RepulsionSpec {
    double length_scale = 0.5;

    void validate() const;
};

struct RepulsionSample {
    Vec2 value = Vec2::Zero();
    Mat2 jacobian_x = Mat2::Zero();
};

/// g(d) = (d / |d|) exp(-|d| / L_r) on d = {x, y}; zero value and jacobian at
/// coincidence.
RepulsionSample repulsion_eval(const TorusPoint& x, const TorusPoint& y,
                               const RepulsionSpec& spec);

RepulsionSample repulsion_from_displacement(const Vec2& d, double length_scale);

}  // namespace mfcbf
