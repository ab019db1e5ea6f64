#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mfcbf/analysis.hpp"
#include "mfcbf/error.hpp"
#include "mfcbf/scenarios.hpp"
#include "support/spectral_oracle.hpp"

using namespace mfcbf;

namespace {

constexpr double kArea = kTwoPi * kTwoPi;

double max_diff(const GridField& a, const GridField& b) {
    const auto n = static_cast<std::ptrdiff_t>(a.resolution());
    double m = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
    }
    return m;
}

GridField smooth_field(std::size_t n) {
    return GridField::from_vector_function(n, [](const Vec2& x) {
        return Vec2(0.3 * std::sin(x.x()) * std::cos(2 * x.y()) + 0.1 * std::cos(3 * x.x()),
                    0.2 * std::cos(x.x() + x.y()) - 0.05 * std::sin(4 * x.y()));
    });
}

GridField smooth_density(std::size_t n) {
    return GridField::from_function(n, [](const Vec2& x) {
        return (1.0 + 0.5 * std::cos(x.x()) * std::sin(x.y()) + 0.2 * std::cos(2 * x.y())) / kArea;
    });
}

}  // namespace

TEST(GridField, IndexingAndNorms) {
    GridField g(32);
    g.at(-1, 33) = 2.0;
    EXPECT_EQ(g.at(31, 1), 2.0);
    EXPECT_EQ(g.sum(), 2.0);
    EXPECT_NEAR(g.point(0, 16).y(), 0.0, 1e-15);
    const GridField one = GridField::from_function(32, [](const Vec2&) { return 1.0; });
    const GridField zero(32);
    EXPECT_NEAR(one.l2_norm(), kTwoPi, 1e-12);
    EXPECT_NEAR(l2_error(one, zero), kTwoPi, 1e-12);
    EXPECT_THROW(GridField(16), Error);
    EXPECT_THROW(l2_error(one, GridField(64)), Error);
}

TEST(Kde, UnitMassAndPeakHeight) {
    const std::size_t n = 128;
    const double sigma = 0.3;
    GridField tmp(n);
    const TorusPoint x = TorusPoint::wrap(tmp.point(40, 90).x(), tmp.point(40, 90).y());
    const GridField rho = kde_density(std::span(&x, 1), sigma, n);
    EXPECT_NEAR(rho.sum() * rho.cell_area(), 1.0, 1e-12);
    EXPECT_NEAR(rho.at(40, 90), 1.0 / (kTwoPi * sigma * sigma), 1e-9);
    EXPECT_EQ(rho.max_abs(), rho.at(40, 90));
}

TEST(Kde, UniformSampleIsNearlyFlat) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    std::vector<TorusPoint> xs;
    for (int i = 0; i < 20000; ++i) xs.push_back(TorusPoint::wrap(u(gen), u(gen)));
    const GridField rho = kde_density(xs, 0.3, 64);
    const GridField flat = GridField::from_function(64, [](const Vec2&) { return 1.0 / kArea; });
    EXPECT_LT(l2_error(rho, flat) / flat.l2_norm(), 0.05);
    EXPECT_THROW(kde_density(std::span<const TorusPoint>{}, 0.3, 64), Error);
}

TEST(VelocityReconstruction, ConstantFieldIsReproduced) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    std::vector<TorusPoint> xs;
    for (int i = 0; i < 500; ++i) xs.push_back(TorusPoint::wrap(u(gen), u(gen)));
    const std::vector<Vec2> v(xs.size(), Vec2(0.4, -0.7));
    const GridField w = reconstruct_velocity_field(xs, v, 0.3, 64);
    for (std::ptrdiff_t i = 0; i < 64; i += 7) {
        for (std::ptrdiff_t j = 0; j < 64; j += 5) {
            EXPECT_NEAR(w.at(i, j, 0), 0.4, 1e-12);
            EXPECT_NEAR(w.at(i, j, 1), -0.7, 1e-12);
        }
    }
}

TEST(Stencils, MatchDiscreteFourierSymbols) {
    const std::size_t n = 64;
    const GridField w = smooth_field(n);
    const GridField rho = smooth_density(n);
    EXPECT_LT(max_diff(divergence(w), oracle::divergence(w, true)), 1e-10);
    EXPECT_LT(max_diff(laplacian(rho), oracle::laplacian(rho, true)), 1e-10);
}

TEST(Stencils, ConvergeToSpectralDerivatives) {
    const std::size_t n = 64;
    const GridField w = smooth_field(n);
    const GridField rho = smooth_density(n);
    const GridField div = oracle::divergence(w, false);
    const GridField lap = oracle::laplacian(rho, false);
    EXPECT_LT(max_diff(divergence(w), div) / div.max_abs(), 0.05);
    EXPECT_LT(max_diff(laplacian(rho), lap) / lap.max_abs(), 0.02);
    // analytic divergence of the smooth field
    const GridField exact = GridField::from_function(n, [](const Vec2& x) {
        return 0.3 * std::cos(x.x()) * std::cos(2 * x.y()) - 0.3 * std::sin(3 * x.x()) -
               0.2 * std::sin(x.x() + x.y()) - 0.2 * std::cos(4 * x.y());
    });
    EXPECT_LT(max_diff(div, exact), 1e-10);
}

TEST(Stability, ZeroDriftUniformTarget) {
    const std::size_t n = 64;
    const GridField w(n, 2);
    const GridField rho = GridField::from_function(n, [](const Vec2&) { return 1.0 / kArea; });
    const StabilityReport r = stability_constants(w, rho, 0.05);
    EXPECT_DOUBLE_EQ(r.a, 0.1);
    EXPECT_NEAR(r.b, 0.0, 1e-14);
    ASSERT_TRUE(r.bound.has_value());
    EXPECT_NEAR(*r.bound, 0.0, 1e-24);
    EXPECT_TRUE(r.condition_ok);
}

TEST(Stability, StrongCompressionViolatesCondition) {
    const std::size_t n = 64;
    const GridField w = GridField::from_vector_function(n, [](const Vec2& x) { return Vec2(std::sin(x.x()), 0.0); });
    const GridField rho = GridField::from_function(n, [](const Vec2&) { return 1.0 / kArea; });
    const StabilityReport r = stability_constants(w, rho, 0.05);
    EXPECT_NEAR(r.div_w_inf, 1.0, 2e-3);
    EXPECT_FALSE(r.condition_ok);
    EXPECT_LT(r.a, 0.0);
    EXPECT_FALSE(r.bound.has_value());
}

TEST(Stability, WeakCompressionSatisfiesCondition) {
    const std::size_t n = 64;
    const GridField w =
        GridField::from_vector_function(n, [](const Vec2& x) { return Vec2(0.05 * std::sin(x.x()), 0.0); });
    const GridField rho = GridField::from_function(n, [](const Vec2&) { return 1.0 / kArea; });
    const StabilityReport r = stability_constants(w, rho, 0.05);
    EXPECT_TRUE(r.condition_ok);
    EXPECT_NEAR(r.a, 0.1 - 0.05, 2e-4);
    // ||div(rho w)||_2 = 0.05 / (4 pi^2) ||cos x1||_2 = 0.05 / (4 pi^2) sqrt(2) pi
    EXPECT_NEAR(r.div_rho_w_l2, 0.05 * std::sqrt(2.0) * kPi / kArea, 3e-3 * r.div_rho_w_l2);
    EXPECT_NEAR(r.b, std::sqrt(2.0) * r.div_rho_w_l2, 1e-15);
    ASSERT_TRUE(r.bound.has_value());
    EXPECT_NEAR(*r.bound, (r.b / r.a) * (r.b / r.a), 1e-15);
}

TEST(Stability, RejectsCoarseOrMismatchedGrids) {
    EXPECT_THROW(stability_constants(GridField(32, 2), GridField(32), 0.05), Error);
    EXPECT_THROW(stability_constants(GridField(64, 2), GridField(128), 0.05), Error);
    EXPECT_THROW(divergence(GridField(64)), Error);
    EXPECT_THROW(laplacian(GridField(64, 2)), Error);
}

TEST(Chi2, HandCounts) {
    const double c = kPi / 2;
    const std::vector<TorusPoint> even = {TorusPoint::wrap(-c, -c), TorusPoint::wrap(-c, c),
                                          TorusPoint::wrap(c, -c), TorusPoint::wrap(c, c)};
    EXPECT_DOUBLE_EQ(chi2_to_uniform(even, 2), 0.0);
    const std::vector<TorusPoint> lumped(4, TorusPoint::wrap(c, c));
    EXPECT_DOUBLE_EQ(chi2_to_uniform(lumped, 2), 12.0);
    EXPECT_THROW(chi2_to_uniform(std::span<const TorusPoint>{}, 4), Error);
}

TEST(Ensemble, MeanAndSampleStd) {
    std::vector<RunRecord> recs(3);
    const double h[3] = {1.0, 2.0, 6.0};
    for (int r = 0; r < 3; ++r) {
        for (int i = 0; i < 2; ++i) {
            MetricRow row;
            row.t = 0.1 * i;
            row.barrier_leaders = h[r] * (i + 1);
            row.violations = static_cast<std::size_t>(r);
            recs[r].rows.push_back(row);
        }
    }
    const EnsembleStats s = ensemble_stats(recs);
    EXPECT_EQ(s.runs, 3u);
    EXPECT_DOUBLE_EQ(s.mean_of(Metric::kBarrierLeaders)[0], 3.0);
    EXPECT_DOUBLE_EQ(s.mean_of(Metric::kBarrierLeaders)[1], 6.0);
    EXPECT_NEAR(s.std_of(Metric::kBarrierLeaders)[0], std::sqrt(7.0), 1e-12);
    EXPECT_DOUBLE_EQ(s.mean_of(Metric::kViolations)[1], 1.0);
    EXPECT_TRUE(std::isnan(s.mean_of(Metric::kBarrierFollowers)[0]));
    EXPECT_EQ(metric_name(Metric::kFracInFollowers), "frac_in_F");

    recs[1].rows[1].t = 0.5;
    EXPECT_THROW(ensemble_stats(recs), Error);
    recs[1].rows.pop_back();
    EXPECT_THROW(ensemble_stats(recs), Error);
}

TEST(Stencils, DivergenceFreeFieldStaysSmall) {
    // w = (d psi / dx2, -d psi / dx1) for psi = cos x1 cos x2
    for (std::size_t n : {64u, 128u}) {
        const GridField w = GridField::from_vector_function(n, [](const Vec2& x) {
            return Vec2(-std::cos(x.x()) * std::sin(x.y()), std::sin(x.x()) * std::cos(x.y()));
        });
        EXPECT_LT(divergence(w).max_abs(), 10.0 / static_cast<double>(n * n));
    }
}

TEST(L2Error, ConstantOffset) {
    const GridField a = GridField::from_function(64, [](const Vec2& x) { return std::sin(x.x()); });
    const GridField b = GridField::from_function(64, [](const Vec2& x) { return std::sin(x.x()) + 0.3; });
    EXPECT_EQ(l2_error(a, a), 0.0);
    EXPECT_NEAR(l2_error(a, b), kTwoPi * 0.3, 1e-12);
}

TEST(Stability, VonMisesTargetMatchesSpectralLaplacian) {
    const std::size_t n = 128;
    const VonMisesTarget t;
    const double z = von_mises_normalizer(t);
    const GridField rho = GridField::from_function(
        n, [&](const Vec2& x) { return von_mises_density(TorusPoint::wrap(x), t) / z; });
    const StabilityReport r = stability_constants(GridField(n, 2), rho, 0.05);
    EXPECT_DOUBLE_EQ(r.a, 0.1);
    const double b_spectral = std::sqrt(2.0) * oracle::laplacian(rho, false).l2_norm();
    EXPECT_LT(std::abs(r.b / b_spectral - 1.0), 0.01);
}

TEST(Ensemble, TwoPointSample) {
    std::vector<RunRecord> recs(2);
    for (int r = 0; r < 2; ++r) {
        MetricRow row;
        row.frac_goal = r;
        recs[r].rows.push_back(row);
    }
    const EnsembleStats s = ensemble_stats(recs);
    EXPECT_DOUBLE_EQ(s.mean_of(Metric::kFracGoal)[0], 0.5);
    EXPECT_NEAR(s.std_of(Metric::kFracGoal)[0], std::sqrt(0.5), 1e-15);
    const EnsembleStats one = ensemble_stats(std::span(recs.data(), 1));
    EXPECT_EQ(one.std_of(Metric::kFracGoal)[0], 0.0);
}
