#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mfcbf/error.hpp"
#include "mfcbf/torus.hpp"

using namespace mfcbf;

namespace {

// Independent reference for the component-wise wrap:
// min(|x - y|, 2pi - |x - y|) sign(x - y) sign(pi - |x - y|).
double reference_component(double x, double y) {
    const double diff = x - y;
    const double mag = std::abs(diff);
    auto sign = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    return std::min(mag, kTwoPi - mag) * sign(diff) * sign(kPi - mag);
}

TorusPoint random_point(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-kPi, kPi);
    return TorusPoint::wrap(u(gen), u(gen));
}

}  // namespace

TEST(WrappedDisplacement, FlipsAcrossTheSeam) {
    const TorusVector d = wrapped_displacement(TorusPoint::wrap(3.0, 0.0), TorusPoint::wrap(-3.0, 0.0));
    EXPECT_NEAR(d.d.x(), -0.28318530717958623, 1e-12);
    EXPECT_DOUBLE_EQ(d.d.y(), 0.0);
}

TEST(WrappedDisplacement, PlainDifferenceInsideHalfPeriod) {
    const TorusVector d = wrapped_displacement(TorusPoint::wrap(0.5, 0.2), TorusPoint::wrap(0.2, 0.5));
    EXPECT_NEAR(d.d.x(), 0.3, 1e-15);
    EXPECT_NEAR(d.d.y(), -0.3, 1e-15);
}

TEST(WrappedDisplacement, CoincidentPointsGiveZero) {
    const TorusPoint p = TorusPoint::wrap(1.1, -2.7);
    EXPECT_EQ(wrapped_displacement(p, p).d, Vec2::Zero());
    EXPECT_NEAR(wrapped_distance(p, TorusPoint::wrap(1.1 + kTwoPi, -2.7 - kTwoPi)), 0.0, 1e-14);
}

TEST(WrappedDisplacement, MatchesReferenceFormula) {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 2000; ++i) {
        const TorusPoint x = random_point(gen);
        const TorusPoint y = random_point(gen);
        const Vec2 d = wrapped_displacement(x, y).d;
        EXPECT_NEAR(d.x(), reference_component(x.x1(), y.x1()), 1e-12);
        EXPECT_NEAR(d.y(), reference_component(x.x2(), y.x2()), 1e-12);
    }
}

TEST(WrappedDisplacement, AntisymmetricAndBounded) {
    std::mt19937_64 gen(12);
    for (int i = 0; i < 2000; ++i) {
        const TorusPoint x = random_point(gen);
        const TorusPoint y = random_point(gen);
        const Vec2 a = wrapped_displacement(x, y).d;
        const Vec2 b = wrapped_displacement(y, x).d;
        EXPECT_NEAR((a + b).norm(), 0.0, 1e-12);
        EXPECT_LE(a.norm(), kPi * std::sqrt(2.0) + 1e-12);
        EXPECT_LE(a.cwiseAbs().maxCoeff(), kPi + 1e-12);
    }
}

TEST(WrappedDisplacement, AntipodalPairsStayAtHalfPeriod) {
    const TorusVector d = wrapped_displacement(TorusPoint::wrap(kPi / 2, 0.0), TorusPoint::wrap(-kPi / 2, 0.0));
    EXPECT_DOUBLE_EQ(d.d.x(), -kPi);
    EXPECT_DOUBLE_EQ(wrapped_distance(TorusPoint::wrap(0.0, -kPi), TorusPoint::wrap(0.0, 0.0)), kPi);
}

TEST(TorusPoint, HalfOpenConvention) {
    EXPECT_DOUBLE_EQ(TorusPoint::wrap(kPi, 0.0).x1(), -kPi);
    EXPECT_DOUBLE_EQ(TorusPoint::wrap(-kPi, 0.0).x1(), -kPi);
    EXPECT_NEAR(TorusPoint::wrap(3 * kPi + 0.5, -0.25).x1(), -kPi + 0.5, 1e-12);
    const TorusPoint p = TorusPoint::wrap(1e6, -1e6);
    EXPECT_GE(p.x1(), -kPi);
    EXPECT_LT(p.x1(), kPi);
    EXPECT_GE(p.x2(), -kPi);
    EXPECT_LT(p.x2(), kPi);
}

TEST(TorusPoint, RejectsNonFinite) {
    EXPECT_THROW(TorusPoint::wrap(std::numeric_limits<double>::quiet_NaN(), 0.0), Error);
    EXPECT_THROW(TorusPoint::wrap(0.0, std::numeric_limits<double>::infinity()), Error);
}

TEST(GaussKernel, ZeroDisplacement) {
    const TorusPoint p = TorusPoint::wrap(0.4, 0.4);
    const KernelSample k = gauss_kernel_eval(p, p, GaussKernelSpec{0.2});
    EXPECT_DOUBLE_EQ(k.value, 1.0);
    EXPECT_EQ(k.grad_x, Vec2::Zero());
    EXPECT_NEAR(k.laplacian_x, -2.0 / 0.04, 1e-12);
}

TEST(GaussKernel, HandValues) {
    const GaussKernelSpec spec{0.2};
    EXPECT_NEAR(gauss_kernel_eval(TorusPoint::wrap(0.2, 0.0), TorusPoint::wrap(0.0, 0.0), spec).value,
                0.6065306597126334, 1e-12);
    // Wrapped distance 0.2 across the seam, not 2 pi - 0.2.
    EXPECT_NEAR(gauss_kernel_eval(TorusPoint::wrap(kPi - 0.1, 0.0), TorusPoint::wrap(-kPi + 0.1, 0.0),
                                  spec)
                    .value,
                0.6065306597126334, 1e-12);
}

TEST(GaussKernel, DerivativesMatchFiniteDifferences) {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    const GaussKernelSpec spec{0.2};
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const TorusPoint y = random_point(gen);
        const TorusPoint x = y.shifted(Vec2(u(gen), u(gen)));
        const KernelSample k = gauss_kernel_eval(x, y, spec);
        auto f = [&](const Vec2& dx) { return gauss_kernel_eval(x.shifted(dx), y, spec).value; };
        const Vec2 e1(h, 0.0), e2(0.0, h);
        const Vec2 grad((f(e1) - f(-e1)) / (2 * h), (f(e2) - f(-e2)) / (2 * h));
        const double lap = (f(e1) + f(-e1) + f(e2) + f(-e2) - 4 * k.value) / (h * h);
        const double gscale = std::max(k.grad_x.norm(), 1e-6);
        EXPECT_LT((grad - k.grad_x).norm() / gscale, 1e-4) << "pair " << i;
        if (std::abs(k.laplacian_x) > 1e-3) {
            EXPECT_LT(std::abs(lap - k.laplacian_x) / std::abs(k.laplacian_x), 1e-4) << "pair " << i;
        }
    }
}

TEST(GaussKernel, InvalidBandwidth) {
    EXPECT_THROW(GaussKernelSpec{0.0}.validate(), Error);
    EXPECT_THROW(GaussKernelSpec{-1.0}.validate(), Error);
}

TEST(Repulsion, UnitLengthScaleValue) {
    const RepulsionSample g =
        repulsion_eval(TorusPoint::wrap(0.5, 0.0), TorusPoint::wrap(0.0, 0.0), RepulsionSpec{0.5});
    EXPECT_NEAR(g.value.x(), 0.36787944117144233, 1e-12);
    EXPECT_DOUBLE_EQ(g.value.y(), 0.0);
}

TEST(Repulsion, CoincidenceConvention) {
    const TorusPoint p = TorusPoint::wrap(-1.0, 2.0);
    const RepulsionSample g = repulsion_eval(p, p, RepulsionSpec{0.5});
    EXPECT_EQ(g.value, Vec2::Zero());
    EXPECT_EQ(g.jacobian_x, Mat2::Zero());
}

TEST(Repulsion, JacobianMatchesFiniteDifferences) {
    std::mt19937_64 gen(14);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
        Vec2 d(u(gen), u(gen));
        if (d.norm() < 0.05) continue;
        const double L = 0.25 + 0.5 * std::abs(u(gen));
        const RepulsionSample g = repulsion_from_displacement(d, L);
        Mat2 fd;
        for (int c = 0; c < 2; ++c) {
            Vec2 e = Vec2::Zero();
            e[c] = h;
            fd.col(c) = (repulsion_from_displacement(d + e, L).value -
                         repulsion_from_displacement(d - e, L).value) /
                        (2 * h);
        }
        EXPECT_LT((fd - g.jacobian_x).norm() / g.jacobian_x.norm(), 1e-5) << "d = " << d.transpose();
    }
}

TEST(Repulsion, InvalidLengthScale) { EXPECT_THROW(RepulsionSpec{0.0}.validate(), Error); }
