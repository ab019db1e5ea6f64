#include "mfcbf/obstacle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mfcbf/error.hpp"

namespace mfcbf {

// ---------------------------------------------------------------- ObstacleSet

bool ObstacleSet::is_static() const {
    return std::all_of(velocities.begin(), velocities.end(),
                       [](const Vec2& v) { return v.x() == 0.0 && v.y() == 0.0; });
}

Vec2 ObstacleSet::velocity(std::size_t i) const {
    return velocities.empty() ? Vec2::Zero() : velocities[i];
}

TorusPoint ObstacleSet::center_at(std::size_t i, double t) const {
    if (velocities.empty() || t == 0.0) return centers[i];
    return centers[i].shifted(velocities[i] * t);
}

bool ObstacleSet::contains(const TorusPoint& x, double t) const {
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (wrapped_distance(x, center_at(i, t)) <= radius) return true;
    }
    return false;
}

void ObstacleSet::validate() const {
    if (!(radius > 0.0)) {
        throw Error(ErrorKind::kInvalidInput, "obstacle radius must be positive");
    }
    if (!velocities.empty() && velocities.size() != centers.size()) {
        throw Error(ErrorKind::kInvalidInput,
                    "obstacle velocities must be empty or match the number of centers");
    }
}

// -------------------------------------------------------------- RadialProfile

namespace {

constexpr int kRadialGaussOrder = 48;
constexpr int kAngularNodes = 160;
constexpr double kCutoffSigmas = 10.0;

}  // namespace

RadialProfile::Sample RadialProfile::integrate(double s, double radius, double sigma) {
    using Rule = boost::math::quadrature::gauss<double, kRadialGaussOrder>;
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    const double half = 0.5 * radius;
    const Vec2 x(s, 0.0);

    double f = 0.0, df = 0.0, lap = 0.0;
    auto accumulate_ring = [&](double rho, double w_rho) {
        double rf = 0.0, rdf = 0.0, rlap = 0.0;
        for (int j = 0; j < kAngularNodes; ++j) {
            const double theta = kTwoPi * j / kAngularNodes;
            const Vec2 y(rho * std::cos(theta), rho * std::sin(theta));
            const KernelSample k = gauss_kernel_from_displacement(x - y, sigma);
            rf += k.value;
            rdf += k.grad_x.x();
            rlap += k.laplacian_x;
        }
        const double w = w_rho * rho * kTwoPi / kAngularNodes;
        f += w * rf;
        df += w * rdf;
        lap += w * rlap;
    };
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        accumulate_ring(half * (1.0 + abscissa[i]), half * weights[i]);
        accumulate_ring(half * (1.0 - abscissa[i]), half * weights[i]);
    }
    const double area = kPi * radius * radius;
    Sample out;
    out.f = f / area;
    out.df = df / area;
    lap /= area;
    // radial Laplacian: lap = f'' + f'/s, and f'' = lap / 2 at the center
    out.d2f = s > 0.0 ? lap - out.df / s : 0.5 * lap;
    return out;
}

RadialProfile::RadialProfile(double radius, double sigma, std::size_t table_size)
    : radius_(radius), sigma_(sigma), cutoff_(radius + kCutoffSigmas * sigma) {
    if (!(radius > 0.0) || !(sigma > 0.0) || table_size < 16) {
        throw Error(ErrorKind::kInvalidInput, "radial profile: bad radius, sigma or table size");
    }
    step_ = cutoff_ / static_cast<double>(table_size - 1);
    table_.reserve(table_size);
    for (std::size_t i = 0; i < table_size; ++i) {
        table_.push_back(integrate(step_ * static_cast<double>(i), radius, sigma));
    }
}

RadialProfile::Sample RadialProfile::eval(double s) const {
    if (s >= cutoff_) return {};
    const double pos = s / step_;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), table_.size() - 2);
    const double t = pos - static_cast<double>(i);
    const double h = step_;
    const Sample& a = table_[i];
    const Sample& b = table_[i + 1];

    // quintic Hermite through (f, f', f'') at both segment ends
    const double df = b.f - a.f;
    const double c0 = a.f;
    const double c1 = h * a.df;
    const double c2 = 0.5 * h * h * a.d2f;
    const double c3 = 10.0 * df - 6.0 * h * a.df - 4.0 * h * b.df - 1.5 * h * h * a.d2f +
                      0.5 * h * h * b.d2f;
    const double c4 = -15.0 * df + 8.0 * h * a.df + 7.0 * h * b.df + 1.5 * h * h * a.d2f -
                      h * h * b.d2f;
    const double c5 = 6.0 * df - 3.0 * h * a.df - 3.0 * h * b.df - 0.5 * h * h * a.d2f +
                      0.5 * h * h * b.d2f;

    Sample out;
    out.f = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
    out.df = (c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)))) / h;
    out.d2f = (2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5))) / (h * h);
    return out;
}

// ---------------------------------------------------------- ObstaclePotential

namespace {

// golden angle pi (3 - sqrt 5)
constexpr double kGoldenAngle = std::numbers::pi * (3.0 - 2.2360679774997896964);

}  // namespace

ObstaclePotential ObstaclePotential::build(const ObstacleSet& obs,
                                           const GaussKernelSpec& kernel,
                                           const PotentialOptions& options,
                                           std::shared_ptr<const RadialProfile> profile) {
    obs.validate();
    kernel.validate();
    if (options.nodes_per_disk < 16) {
        throw Error(ErrorKind::kInvalidInput, "build_potential: nodes_per_disk must be >= 16");
    }
    ObstaclePotential pot;
    pot.source_ = obs;
    pot.kernel_ = kernel;
    pot.options_ = options;
    pot.backend_ = options.backend;
    pot.normalization_ = options.normalization;
    if (options.backend == PotentialBackend::kRadialTable) {
        if (!profile || profile->radius() != obs.radius || profile->sigma() != kernel.sigma) {
            profile = std::make_shared<const RadialProfile>(obs.radius, kernel.sigma);
        }
        pot.profile_ = std::move(profile);
    }
    if (obs.empty()) return pot;

    const std::size_t m = options.nodes_per_disk;
    const std::size_t total = m * obs.size();
    pot.nodes_.reserve(total);
    pot.weights_.assign(total, 1.0 / static_cast<double>(total));
    pot.node_disk_.reserve(total);
    for (std::size_t disk = 0; disk < obs.size(); ++disk) {
        const Vec2 c = obs.centers[disk].coords();
        for (std::size_t i = 0; i < m; ++i) {
            const double rho = obs.radius * std::sqrt((static_cast<double>(i) + 0.5) /
                                                      static_cast<double>(m));
            const double theta = kGoldenAngle * static_cast<double>(i);
            pot.nodes_.push_back(
                TorusPoint::wrap(c + rho * Vec2(std::cos(theta), std::sin(theta))));
            pot.node_disk_.push_back(disk);
        }
    }
    pot.mass_ = options.normalization == DensityNormalization::kPerDisk
                    ? static_cast<double>(obs.size())
                    : 1.0;
    return pot;
}

ObstaclePotential build_potential(const ObstacleSet& obs, const GaussKernelSpec& kernel,
                                  const PotentialOptions& options) {
    return ObstaclePotential::build(obs, kernel, options, nullptr);
}

ObstaclePotential ObstaclePotential::relocated(const ObstacleSet& obs) const {
    return build(obs, kernel_, options_, profile_);
}

PotentialSample ObstaclePotential::eval(const TorusPoint& x, double t) const {
    if (source_.empty()) return {};
    return backend_ == PotentialBackend::kRadialTable ? eval_radial(x, t)
                                                      : eval_quadrature(x, t);
}

PotentialSample ObstaclePotential::eval_quadrature(const TorusPoint& x, double t) const {
    PotentialSample out;
    const bool moving = t != 0.0 && !source_.is_static();
    for (std::size_t q = 0; q < nodes_.size(); ++q) {
        const std::size_t disk = node_disk_[q];
        const TorusPoint y = moving ? nodes_[q].shifted(source_.velocity(disk) * t) : nodes_[q];
        const KernelSample k =
            gauss_kernel_from_displacement(wrapped_displacement(x, y).d, kernel_.sigma);
        const double w = weights_[q];
        out.value += w * k.value;
        out.grad += w * k.grad_x;
        out.laplacian += w * k.laplacian_x;
        if (moving) out.dt -= w * k.grad_x.dot(source_.velocity(disk));
    }
    out.value *= mass_;
    out.grad *= mass_;
    out.laplacian *= mass_;
    out.dt *= mass_;
    return out;
}

PotentialSample ObstaclePotential::eval_radial(const TorusPoint& x, double t) const {
    PotentialSample out;
    const double disk_mass = mass_ / static_cast<double>(source_.size());
    const double cutoff = profile_->cutoff();
    for (std::size_t i = 0; i < source_.size(); ++i) {
        const Vec2 d = wrapped_displacement(x, source_.center_at(i, t)).d;
        if (std::abs(d.x()) >= cutoff || std::abs(d.y()) >= cutoff) continue;
        const double s = d.norm();
        const RadialProfile::Sample p = profile_->eval(s);
        // below this radius f'/s is replaced by its limit f''(0)
        constexpr double kTiny = 1e-9;
        const Vec2 grad = s > kTiny ? Vec2((p.df / s) * d) : Vec2::Zero();
        const double lap = s > kTiny ? p.d2f + p.df / s : 2.0 * p.d2f;
        out.value += disk_mass * p.f;
        out.grad += disk_mass * grad;
        out.laplacian += disk_mass * lap;
        out.dt -= disk_mass * grad.dot(source_.velocity(i));
    }
    return out;
}

PotentialSample potential_eval(const ObstaclePotential& pot, const TorusPoint& x, double t) {
    return pot.eval(x, t);
}

std::vector<PotentialSample> potential_eval_all(const ObstaclePotential& pot,
                                                std::span<const TorusPoint> positions,
                                                double t) {
    std::vector<PotentialSample> out;
    out.reserve(positions.size());
    for (const TorusPoint& p : positions) out.push_back(pot.eval(p, t));
    return out;
}

// -------------------------------------------------------------------- barrier

void BarrierSpec::validate() const {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidInput, "barrier epsilon must be > 0");
    if (!(gamma > 0.0)) throw Error(ErrorKind::kInvalidInput, "barrier gamma must be > 0");
    kernel.validate();
}

double kernel_overlap(std::span<const TorusPoint> positions, const ObstaclePotential& pot,
                      double t) {
    if (positions.empty()) {
        throw Error(ErrorKind::kInvalidInput, "kernel_overlap: empty position list");
    }
    double sum = 0.0;
    for (const TorusPoint& p : positions) sum += pot.eval(p, t).value;
    return sum / static_cast<double>(positions.size());
}

double barrier_value(std::span<const TorusPoint> positions, const ObstaclePotential& pot,
                     const BarrierSpec& spec, double t) {
    return spec.epsilon - kernel_overlap(positions, pot, t);
}

OverlapInfima overlap_infima(const ObstaclePotential& pot, std::size_t grid_resolution) {
    if (grid_resolution < 32) {
        throw Error(ErrorKind::kInvalidInput,
                    "min_overlap_bound: grid resolution must be >= 32, got " +
                        std::to_string(grid_resolution));
    }
    const ObstacleSet& obs = pot.source();
    const double h = kTwoPi / static_cast<double>(grid_resolution);
    OverlapInfima out;
    out.resolution = grid_resolution;
    out.inside = std::numeric_limits<double>::infinity();
    out.outside = std::numeric_limits<double>::infinity();
    double max_grad = 0.0;
    for (std::size_t i = 0; i < grid_resolution; ++i) {
        for (std::size_t j = 0; j < grid_resolution; ++j) {
            const TorusPoint x = TorusPoint::wrap(-kPi + h * static_cast<double>(i),
                                                  -kPi + h * static_cast<double>(j));
            const PotentialSample c = pot.eval(x, 0.0);
            max_grad = std::max(max_grad, c.grad.norm());
            double& slot = obs.contains(x, 0.0) ? out.inside : out.outside;
            slot = std::min(slot, c.value);
        }
    }
    if (!std::isfinite(out.inside)) out.inside = 0.0;  // no grid point fell inside O
    if (!std::isfinite(out.outside)) out.outside = 0.0;
    out.tolerance = max_grad * h;
    return out;
}

double min_overlap_bound(const OverlapInfima& infima, double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw Error(ErrorKind::kInvalidInput, "min_overlap_bound: mu must lie in [0, 1]");
    }
    return mu * infima.inside + (1.0 - mu) * infima.outside;
}

double min_overlap_bound(const ObstaclePotential& pot, double mu, std::size_t grid_resolution) {
    return min_overlap_bound(overlap_infima(pot, grid_resolution), mu);
}

Certificate certified_threshold(const OverlapInfima& infima, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) {
        throw Error(ErrorKind::kInvalidInput, "certified_threshold: mu must lie in (0, 1)");
    }
    if (!(infima.inside > infima.outside)) {
        throw Error(ErrorKind::kCertificateUnavailable,
                    "certified_threshold: inf_O C <= inf_Oc C, B(mu) is not increasing");
    }
    return Certificate{mu, min_overlap_bound(infima, mu), infima};
}

Certificate certified_threshold(const ObstaclePotential& pot, double mu,
                                std::size_t grid_resolution) {
    return certified_threshold(overlap_infima(pot, grid_resolution), mu);
}

double fraction_inside(std::span<const TorusPoint> positions, const ObstacleSet& obs,
                       double t) {
    if (positions.empty()) return 0.0;
    std::size_t count = 0;
    for (const TorusPoint& p : positions) count += obs.contains(p, t) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(positions.size());
}

}  // namespace mfcbf
