#include "mfcbf/torus.hpp"

#include <cmath>
#include <string>

#include "mfcbf/error.hpp"

namespace mfcbf {

double wrap_angle(double x) {
    double y = x - kTwoPi * std::floor((x + kPi) / kTwoPi);
    // floor() can land one period off when x + pi is within rounding of a multiple of 2 pi
    if (y >= kPi) y -= kTwoPi;
    if (y < -kPi) y += kTwoPi;
    return y;
}

TorusPoint TorusPoint::wrap(const Vec2& raw) {
    if (!std::isfinite(raw.x()) || !std::isfinite(raw.y())) {
        throw Error(ErrorKind::kInvalidInput, "wrap_point: non-finite component");
    }
    return TorusPoint(Vec2(wrap_angle(raw.x()), wrap_angle(raw.y())));
}

namespace {

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

double wrapped_component(double xi, double yi) {
    const double diff = xi - yi;
    const double mag = std::abs(diff);
    // antipodal pair: the sign product vanishes, keep the half-open representative
    if (mag == kPi) return -kPi;
    return std::min(mag, kTwoPi - mag) * sign(diff) * sign(kPi - mag);
}

}  // namespace

TorusVector wrapped_displacement(const TorusPoint& x, const TorusPoint& y) {
    return TorusVector{Vec2(wrapped_component(x.x1(), y.x1()),
                            wrapped_component(x.x2(), y.x2()))};
}

void GaussKernelSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorKind::kInvalidInput,
                    "kernel bandwidth must be positive, got " + std::to_string(sigma));
    }
}

KernelSample gauss_kernel_from_displacement(const Vec2& d, double sigma) {
    const double s2 = sigma * sigma;
    const double r2 = d.squaredNorm();
    KernelSample out;
    out.value = std::exp(-r2 / (2.0 * s2));
    out.grad_x = -(out.value / s2) * d;
    out.laplacian_x = out.value * (r2 / (s2 * s2) - 2.0 / s2);
    return out;
}

KernelSample gauss_kernel_eval(const TorusPoint& x, const TorusPoint& y,
                               const GaussKernelSpec& spec) {
    return gauss_kernel_from_displacement(wrapped_displacement(x, y).d, spec.sigma);
}

void RepulsionSpec::validate() const {
    if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
        throw Error(ErrorKind::kInvalidInput,
                    "repulsion length scale must be positive, got " +
                        std::to_string(length_scale));
    }
}

RepulsionSample repulsion_from_displacement(const Vec2& d, double length_scale) {
    RepulsionSample out;
    const double s = d.norm();
    if (s == 0.0) return out;
    const double decay = std::exp(-s / length_scale);
    const Vec2 e = d / s;
    out.value = decay * e;
    // d/dd [ (d/s) exp(-s/L) ] = exp(-s/L) [ (I - e e^T) / s - e e^T / L ]
    const Mat2 eet = e * e.transpose();
    out.jacobian_x = decay * ((Mat2::Identity() - eet) / s - eet / length_scale);
    return out;
}

RepulsionSample repulsion_eval(const TorusPoint& x, const TorusPoint& y,
                               const RepulsionSpec& spec) {
    return repulsion_from_displacement(wrapped_displacement(x, y).d, spec.length_scale);
}

}  // namespace mfcbf
