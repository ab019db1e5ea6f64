#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mfcbf/particle_sim.hpp"
#include "mfcbf/torus.hpp"

namespace mfcbf {

/// Scalar or vector field sampled at x_ij = (-pi + i h, -pi + j h), h = 2 pi / n,
/// with periodic indexing.
class GridField {
public:
    GridField(std::size_t resolution, std::size_t components = 1);

    static GridField from_function(std::size_t resolution,
                                   const std::function<double(const Vec2&)>& f);
    static GridField from_vector_function(std::size_t resolution,
                                          const std::function<Vec2(const Vec2&)>& f);

    std::size_t resolution() const { return n_; }
    std::size_t components() const { return components_; }
    double spacing() const { return kTwoPi / static_cast<double>(n_); }
    double cell_area() const { return spacing() * spacing(); }
    Vec2 point(std::size_t i, std::size_t j) const;

    double& at(std::ptrdiff_t i, std::ptrdiff_t j, std::size_t c = 0);
    double at(std::ptrdiff_t i, std::ptrdiff_t j, std::size_t c = 0) const;

    double sum(std::size_t c = 0) const;
    double max_abs(std::size_t c = 0) const;
    /// sqrt(sum |f|^2 h^2) over every component.
    double l2_norm() const;

private:
    std::size_t index(std::ptrdiff_t i, std::ptrdiff_t j, std::size_t c) const;

    std::size_t n_;
    std::size_t components_;
    std::vector<double> values_;
};

/// Periodic Gaussian KDE of the empirical measure, normalized so that the
/// cell sum times the cell area is 1.
GridField kde_density(std::span<const TorusPoint> positions, double bandwidth,
                      std::size_t resolution);

/// Nadaraya-Watson reconstruction of a velocity field from per-agent velocities.
GridField reconstruct_velocity_field(std::span<const TorusPoint> positions,
                                     std::span<const Vec2> velocities, double bandwidth,
                                     std::size_t resolution);

/// L2(Omega) norm of field - target by grid quadrature.
double l2_error(const GridField& field, const GridField& target);

/// Centered periodic differences.
GridField divergence(const GridField& vector_field);
GridField laplacian(const GridField& scalar_field);

struct StabilityReport {
    double div_w_inf = 0.0;        // ||div w||_inf
    double div_rho_w_l2 = 0.0;     // ||div(rho_bar w)||_2
    double lap_rho_l2 = 0.0;       // ||lap rho_bar||_2
    double diffusion = 0.0;
    double a = 0.0;                // 2 D - ||div w||_inf
    double b = 0.0;                // sqrt(2) (||div(rho_bar w)||_2 + ||lap rho_bar||_2)
    std::optional<double> bound;   // (b / a)^2, present iff a > 0
    bool condition_ok = false;     // D > ||div w||_inf / 2
};

StabilityReport stability_constants(const GridField& w_field, const GridField& rho_bar,
                                    double diffusion);

/// Pearson chi-square statistic of the positions binned on bins x bins cells
/// against the uniform distribution.
double chi2_to_uniform(std::span<const TorusPoint> positions, std::size_t bins);

// ------------------------------------------------------------------ ensembles

enum class Metric : std::size_t {
    kBarrierLeaders,
    kBarrierFollowers,
    kFracInLeaders,
    kFracInFollowers,
    kFracGoal,
    kDeviation,
    kViolations,
};
inline constexpr std::size_t kMetricCount = 7;

/// CSV column name of a metric (H_L, H_F, frac_in_L, ...).
std::string_view metric_name(Metric m);
double metric_value(const MetricRow& row, Metric m);

struct EnsembleStats {
    std::size_t runs = 0;
    std::vector<double> t;
    std::array<std::vector<double>, kMetricCount> mean;
    std::array<std::vector<double>, kMetricCount> std;  // sample standard deviation

    const std::vector<double>& mean_of(Metric m) const {
        return mean[static_cast<std::size_t>(m)];
    }
    const std::vector<double>& std_of(Metric m) const {
        return std[static_cast<std::size_t>(m)];
    }
};

/// Pointwise mean and sample std per metric. Throws kInvalidInput when the
/// records do not share a time grid.
EnsembleStats ensemble_stats(std::span<const RunRecord> records);

}  // namespace mfcbf
