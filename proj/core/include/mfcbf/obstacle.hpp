#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "mfcbf/torus.hpp"

namespace mfcbf {

/// Union of equal-radius disks, each translating rigidly at its own velocity.
struct ObstacleSet {
    std::vector<TorusPoint> centers;
    double radius = 0.5;
    std::vector<Vec2> velocities;  // empty, or one per center

    std::size_t size() const { return centers.size(); }
    bool empty() const { return centers.empty(); }
    bool is_static() const;
    Vec2 velocity(std::size_t i) const;
    TorusPoint center_at(std::size_t i, double t) const;
    bool contains(const TorusPoint& x, double t) const;

    void validate() const;
};

/// How the uniform obstacle density rho_O distributes mass over the disks.
///   kUnion   - rho_O is one probability measure over the whole union.
///   kPerDisk - every disk carries unit mass (rho_O = 1 / (pi r^2) on each disk).
enum class DensityNormalization { kUnion, kPerDisk };

/// kQuadrature sums the kernel over the node set; kRadialTable uses the exact
/// radially symmetric profile of one disk, tabulated once.
enum class PotentialBackend { kQuadrature, kRadialTable };

struct PotentialOptions {
    std::size_t nodes_per_disk = 256;
    DensityNormalization normalization = DensityNormalization::kPerDisk;
    PotentialBackend backend = PotentialBackend::kQuadrature;
};

/// C(x) = int k(x, y) rho_O(y) dy for a single unit-mass uniform disk, as a
/// function of the distance s to the disk center. Tabulated with f, f', f''
/// on a uniform grid and evaluated by quintic Hermite interpolation.
class RadialProfile {
public:
    struct Sample {
        double f = 0.0;
        double df = 0.0;
        double d2f = 0.0;
    };

    RadialProfile(double radius, double sigma, std::size_t table_size = 1024);

    /// Direct polar quadrature of the disk integral (no table). Used to fill
    /// the table and as a reference in tests.
    static Sample integrate(double s, double radius, double sigma);

    Sample eval(double s) const;

    double radius() const { return radius_; }
    double sigma() const { return sigma_; }
    double cutoff() const { return cutoff_; }

private:
    double radius_;
    double sigma_;
    double cutoff_;
    double step_;
    std::vector<Sample> table_;
};

struct PotentialSample {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    double laplacian = 0.0;
    double dt = 0.0;
};

class ObstaclePotential {
public:
    /// Empty potential: C vanishes identically.
    ObstaclePotential() = default;

    const ObstacleSet& source() const { return source_; }
    const GaussKernelSpec& kernel() const { return kernel_; }
    PotentialBackend backend() const { return backend_; }
    DensityNormalization normalization() const { return normalization_; }

    /// Quadrature nodes at t = 0 and their weights (sum to 1).
    std::span<const TorusPoint> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    /// Total mass of rho_O: 1 for kUnion, the disk count for kPerDisk.
    double mass() const { return mass_; }

    PotentialSample eval(const TorusPoint& x, double t) const;

    /// Same potential evaluated for a relocated obstacle layout with the same
    /// radius; reuses the radial table.
    ObstaclePotential relocated(const ObstacleSet& obs) const;

private:
    friend ObstaclePotential build_potential(const ObstacleSet&, const GaussKernelSpec&,
                                             const PotentialOptions&);

    static ObstaclePotential build(const ObstacleSet& obs, const GaussKernelSpec& kernel,
                                   const PotentialOptions& options,
                                   std::shared_ptr<const RadialProfile> profile);

    PotentialSample eval_quadrature(const TorusPoint& x, double t) const;
    PotentialSample eval_radial(const TorusPoint& x, double t) const;

    ObstacleSet source_;
    GaussKernelSpec kernel_;
    PotentialOptions options_;
    PotentialBackend backend_ = PotentialBackend::kQuadrature;
    DensityNormalization normalization_ = DensityNormalization::kPerDisk;
    std::vector<TorusPoint> nodes_;
    std::vector<double> weights_;
    std::vector<std::size_t> node_disk_;
    double mass_ = 0.0;
    std::shared_ptr<const RadialProfile> profile_;
};

/// Sunflower (Vogel spiral) nodes over every disk, equal weight per node.
/// Requires nodes_per_disk >= 16.
ObstaclePotential build_potential(const ObstacleSet& obs, const GaussKernelSpec& kernel,
                                  const PotentialOptions& options = {});

PotentialSample potential_eval(const ObstaclePotential& pot, const TorusPoint& x, double t);

std::vector<PotentialSample> potential_eval_all(const ObstaclePotential& pot,
                                                std::span<const TorusPoint> positions,
                                                double t);

struct BarrierSpec {
    double epsilon = 0.01;
    double gamma = 0.1;
    GaussKernelSpec kernel;

    void validate() const;
};

/// Empirical kernel-weighted overlap R_k(rho_hat, rho_O) = mean of C over agents.
double kernel_overlap(std::span<const TorusPoint> positions, const ObstaclePotential& pot,
                      double t);

/// H = epsilon - R_k.
double barrier_value(std::span<const TorusPoint> positions, const ObstaclePotential& pot,
                     const BarrierSpec& spec, double t);

/// Grid estimates of inf_O C and inf_{O^c} C. `tolerance` bounds how far the
/// grid infima may sit above the true infima (max grid |grad C| times the
/// grid spacing).
struct OverlapInfima {
    double inside = 0.0;
    double outside = 0.0;
    double tolerance = 0.0;
    std::size_t resolution = 0;
};

OverlapInfima overlap_infima(const ObstaclePotential& pot, std::size_t grid_resolution);

/// B(mu) = mu inf_O C + (1 - mu) inf_{O^c} C.
double min_overlap_bound(const OverlapInfima& infima, double mu);
double min_overlap_bound(const ObstaclePotential& pot, double mu, std::size_t grid_resolution);

struct Certificate {
    double mu = 0.0;
    double epsilon = 0.0;  // B(mu)
    OverlapInfima infima;
};

/// Threshold epsilon = B(mu) such that overlap < epsilon certifies inside-mass < mu.
/// Throws kCertificateUnavailable unless inf_O C > inf_{O^c} C.
Certificate certified_threshold(const OverlapInfima& infima, double mu);
Certificate certified_threshold(const ObstaclePotential& pot, double mu,
                                std::size_t grid_resolution);

/// Fraction of agents within r_O (wrapped) of some disk center.
double fraction_inside(std::span<const TorusPoint> positions, const ObstacleSet& obs,
                       double t);

}  // namespace mfcbf
