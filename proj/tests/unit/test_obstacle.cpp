#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mfcbf/error.hpp"
#include "mfcbf/obstacle.hpp"

using namespace mfcbf;

namespace {

constexpr double kSigma = 0.2;
constexpr double kRadius = 0.5;

// Kernel integral over a unit-mass disk at distance s from its center, by a
// plain midpoint rule in polar coordinates around the disk center.
double disk_integral_midpoint(double s, double radius, double sigma, int nr = 1200, int nt = 720) {
    double sum = 0.0;
    const double dr = radius / nr;
    const double dth = kTwoPi / nt;
    for (int i = 0; i < nr; ++i) {
        const double rho = (i + 0.5) * dr;
        for (int j = 0; j < nt; ++j) {
            const double th = (j + 0.5) * dth;
            const double d2 = s * s + rho * rho - 2.0 * s * rho * std::cos(th);
            sum += std::exp(-d2 / (2 * sigma * sigma)) * rho;
        }
    }
    return sum * dr * dth / (kPi * radius * radius);
}

ObstacleSet single_disk(double x = 0.0, double y = 0.0) {
    ObstacleSet o;
    o.centers = {TorusPoint::wrap(x, y)};
    o.radius = kRadius;
    return o;
}

ObstacleSet three_disks() {
    ObstacleSet o;
    o.centers = {TorusPoint::wrap(-1.5, 1.0), TorusPoint::wrap(1.2, 1.6), TorusPoint::wrap(0.4, -1.8)};
    o.radius = kRadius;
    return o;
}

PotentialOptions options(PotentialBackend b, std::size_t nodes = 256) {
    return PotentialOptions{nodes, DensityNormalization::kPerDisk, b};
}

class BothBackends : public ::testing::TestWithParam<PotentialBackend> {};

}  // namespace

TEST(ObstacleSet, ContainsAndMotion) {
    ObstacleSet o = single_disk(1.0, 0.0);
    o.velocities = {Vec2(0.5, 0.0)};
    EXPECT_TRUE(o.contains(TorusPoint::wrap(1.2, 0.0), 0.0));
    EXPECT_FALSE(o.contains(TorusPoint::wrap(1.2, 0.0), 2.0));
    EXPECT_TRUE(o.contains(TorusPoint::wrap(2.1, 0.0), 2.0));
    EXPECT_FALSE(o.is_static());
    o.velocities = {Vec2(1.0, 0.0), Vec2(1.0, 0.0)};
    EXPECT_THROW(o.validate(), Error);
}

TEST(RadialProfile, CenterValueMatchesClosedForm) {
    // Gaussian over a uniform disk of unit mass, evaluated at the center:
    // 2 sigma^2 (1 - exp(-r^2 / (2 sigma^2))) / r^2.
    const double closed = 2 * kSigma * kSigma * (1 - std::exp(-kRadius * kRadius / (2 * kSigma * kSigma))) /
                          (kRadius * kRadius);
    EXPECT_NEAR(closed, 0.30594, 5e-6);
    const RadialProfile p(kRadius, kSigma);
    EXPECT_NEAR(p.eval(0.0).f, closed, 1e-9);
    EXPECT_NEAR(RadialProfile::integrate(0.0, kRadius, kSigma).f, closed, 1e-12);
}

TEST(RadialProfile, MatchesMidpointIntegral) {
    const RadialProfile p(kRadius, kSigma);
    for (double s : {0.1, 0.3, 0.49, 0.5, 0.51, 0.7, 1.0, 1.4}) {
        const double ref = disk_integral_midpoint(s, kRadius, kSigma);
        EXPECT_NEAR(p.eval(s).f, ref, 2e-6 * std::max(1.0, ref)) << "s = " << s;
    }
}

TEST(RadialProfile, VanishesBeyondCutoff) {
    const RadialProfile p(kRadius, kSigma);
    EXPECT_EQ(p.eval(p.cutoff() + 0.1).f, 0.0);
    EXPECT_LT(p.eval(p.cutoff() - 1e-9).f, 1e-15);
}

TEST_P(BothBackends, CenterValue) {
    const ObstaclePotential pot = build_potential(single_disk(), GaussKernelSpec{kSigma}, options(GetParam()));
    EXPECT_NEAR(pot.eval(TorusPoint::wrap(0.0, 0.0), 0.0).value, 0.30594, 1e-3);
}

TEST_P(BothBackends, DerivativesMatchFiniteDifferences) {
    const ObstaclePotential pot = build_potential(three_disks(), GaussKernelSpec{kSigma}, options(GetParam()));
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 2);
    const double h = 1e-5;
    const double hl = 1e-4;
    for (int i = 0; i < 100; ++i) {
        const TorusPoint x = pot.source().centers[pick(gen)].shifted(Vec2(off(gen), off(gen)));
        const PotentialSample c = pot.eval(x, 0.0);
        auto f = [&](const Vec2& dx) { return pot.eval(x.shifted(dx), 0.0).value; };
        const Vec2 g((f(Vec2(h, 0)) - f(Vec2(-h, 0))) / (2 * h), (f(Vec2(0, h)) - f(Vec2(0, -h))) / (2 * h));
        const double lap = (f(Vec2(hl, 0)) + f(Vec2(-hl, 0)) + f(Vec2(0, hl)) + f(Vec2(0, -hl)) - 4 * c.value) /
                           (hl * hl);
        EXPECT_LT((g - c.grad).norm() / std::max(c.grad.norm(), 1e-3), 1e-4) << "point " << i;
        EXPECT_LT(std::abs(lap - c.laplacian) / std::max(std::abs(c.laplacian), 1e-3), 1e-3) << "point " << i;
    }
}

TEST_P(BothBackends, TimeDerivativeOfTranslatingDisks) {
    ObstacleSet o = three_disks();
    o.velocities = {Vec2(0.3, -0.2), Vec2(0.0, 0.5), Vec2(-0.4, 0.1)};
    const ObstaclePotential pot = build_potential(o, GaussKernelSpec{kSigma}, options(GetParam()));
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    const double h = 1e-5;
    const double t = 0.7;
    for (int i = 0; i < 50; ++i) {
        const TorusPoint x = o.center_at(static_cast<std::size_t>(i % 3), t).shifted(Vec2(off(gen), off(gen)));
        const double fd = (pot.eval(x, t + h).value - pot.eval(x, t - h).value) / (2 * h);
        const double dt = pot.eval(x, t).dt;
        EXPECT_NEAR(dt, fd, 1e-6 + 1e-5 * std::abs(fd));
    }
}

INSTANTIATE_TEST_SUITE_P(Backends, BothBackends,
                         ::testing::Values(PotentialBackend::kQuadrature, PotentialBackend::kRadialTable));

TEST(ObstaclePotential, BackendsAgree) {
    const ObstacleSet o = three_disks();
    const ObstaclePotential fine = build_potential(o, GaussKernelSpec{kSigma}, options(PotentialBackend::kQuadrature, 4096));
    const ObstaclePotential table = build_potential(o, GaussKernelSpec{kSigma}, options(PotentialBackend::kRadialTable));
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int i = 0; i < 200; ++i) {
        const TorusPoint x = TorusPoint::wrap(u(gen), u(gen));
        EXPECT_NEAR(fine.eval(x, 0.0).value, table.eval(x, 0.0).value, 1e-4);
    }
}

TEST(ObstaclePotential, NormalizationAndMass) {
    const ObstacleSet o = three_disks();
    const ObstaclePotential per = build_potential(o, GaussKernelSpec{kSigma}, options(PotentialBackend::kRadialTable));
    PotentialOptions uopt = options(PotentialBackend::kRadialTable);
    uopt.normalization = DensityNormalization::kUnion;
    const ObstaclePotential uni = build_potential(o, GaussKernelSpec{kSigma}, uopt);
    EXPECT_DOUBLE_EQ(per.mass(), 3.0);
    EXPECT_DOUBLE_EQ(uni.mass(), 1.0);
    const TorusPoint x = o.centers[1];
    EXPECT_NEAR(per.eval(x, 0.0).value, 3.0 * uni.eval(x, 0.0).value, 1e-12);

    const ObstaclePotential q = build_potential(o, GaussKernelSpec{kSigma}, options(PotentialBackend::kQuadrature));
    double wsum = 0.0;
    for (double w : q.weights()) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    EXPECT_EQ(q.nodes().size(), 3u * 256u);
    for (const TorusPoint& n : q.nodes()) EXPECT_TRUE(o.contains(n, 0.0));
}

TEST(ObstaclePotential, EmptyLayoutVanishes) {
    const ObstaclePotential pot = build_potential(ObstacleSet{}, GaussKernelSpec{kSigma});
    const PotentialSample s = pot.eval(TorusPoint::wrap(0.3, 0.3), 0.0);
    EXPECT_EQ(s.value, 0.0);
    EXPECT_EQ(s.grad, Vec2::Zero());
}

TEST(ObstaclePotential, RelocatedMatchesFreshBuild) {
    const ObstaclePotential a = build_potential(single_disk(), GaussKernelSpec{kSigma}, options(PotentialBackend::kRadialTable));
    const ObstaclePotential b = a.relocated(single_disk(1.0, -0.5));
    const ObstaclePotential c = build_potential(single_disk(1.0, -0.5), GaussKernelSpec{kSigma},
                                                options(PotentialBackend::kRadialTable));
    const TorusPoint x = TorusPoint::wrap(1.3, -0.4);
    EXPECT_DOUBLE_EQ(b.eval(x, 0.0).value, c.eval(x, 0.0).value);
}

TEST(Barrier, OverlapIsMeanPotential) {
    const ObstaclePotential pot = build_potential(three_disks(), GaussKernelSpec{kSigma}, options(PotentialBackend::kRadialTable));
    const std::vector<TorusPoint> xs = {TorusPoint::wrap(-1.5, 1.0), TorusPoint::wrap(0.0, 0.0),
                                        TorusPoint::wrap(1.0, 1.4)};
    double mean = 0.0;
    for (const TorusPoint& x : xs) mean += pot.eval(x, 0.0).value / 3.0;
    EXPECT_NEAR(kernel_overlap(xs, pot, 0.0), mean, 1e-15);
    EXPECT_NEAR(barrier_value(xs, pot, BarrierSpec{0.05, 0.1, GaussKernelSpec{kSigma}}, 0.0), 0.05 - mean, 1e-15);
    EXPECT_THROW(kernel_overlap(std::vector<TorusPoint>{}, pot, 0.0), Error);
}

TEST(Barrier, SpecValidation) {
    EXPECT_THROW((BarrierSpec{0.0, 0.1, GaussKernelSpec{0.2}}.validate()), Error);
    EXPECT_THROW((BarrierSpec{0.01, 0.0, GaussKernelSpec{0.2}}.validate()), Error);
    EXPECT_NO_THROW((BarrierSpec{0.01, 0.1, GaussKernelSpec{0.2}}.validate()));
}

TEST(MassBound, InfimaOfIsolatedDisk) {
    const ObstaclePotential pot = build_potential(single_disk(), GaussKernelSpec{kSigma}, options(PotentialBackend::kRadialTable));
    const OverlapInfima inf = overlap_infima(pot, 512);
    // Inside, C is smallest on the boundary circle; far away it is ~0.
    const double boundary = disk_integral_midpoint(kRadius, kRadius, kSigma);
    EXPECT_GE(inf.inside, boundary - 1e-9);
    EXPECT_LE(inf.inside, boundary + inf.tolerance);
    EXPECT_LT(inf.outside, 1e-12);
    EXPECT_GT(inf.tolerance, 0.0);
    EXPECT_NEAR(min_overlap_bound(inf, 0.0), inf.outside, 1e-15);
    EXPECT_NEAR(min_overlap_bound(inf, 1.0), inf.inside, 1e-15);
    EXPECT_THROW(overlap_infima(pot, 16), Error);
}

TEST(MassBound, AffineInMu) {
    const ObstaclePotential pot = build_potential(three_disks(), GaussKernelSpec{kSigma}, options(PotentialBackend::kRadialTable));
    const OverlapInfima inf = overlap_infima(pot, 256);
    const double b0 = min_overlap_bound(inf, 0.0);
    const double b1 = min_overlap_bound(inf, 1.0);
    for (double mu : {0.01, 0.05, 0.3, 0.77}) {
        EXPECT_NEAR(min_overlap_bound(inf, mu), (1 - mu) * b0 + mu * b1, 1e-12);
    }
}

TEST(Certificate, RequiresSeparatedInfima) {
    OverlapInfima flat{0.1, 0.1, 0.0, 64};
    try {
        certified_threshold(flat, 0.1);
        FAIL() << "expected certificate-unavailable";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kCertificateUnavailable);
    }
    OverlapInfima ok{0.2, 0.01, 0.0, 64};
    const Certificate c = certified_threshold(ok, 0.25);
    EXPECT_NEAR(c.epsilon, 0.25 * 0.2 + 0.75 * 0.01, 1e-15);
}

TEST(FractionInside, CountsAgentsInDisks) {
    const ObstacleSet o = three_disks();
    const std::vector<TorusPoint> xs = {TorusPoint::wrap(-1.5, 1.0), TorusPoint::wrap(-1.5, 1.45),
                                        TorusPoint::wrap(-1.5, 1.55), TorusPoint::wrap(3.0, 3.0)};
    EXPECT_DOUBLE_EQ(fraction_inside(xs, o, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(fraction_inside(std::vector<TorusPoint>{}, o, 0.0), 0.0);
}
