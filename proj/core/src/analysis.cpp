#include "mfcbf/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "mfcbf/error.hpp"

namespace mfcbf {

// ------------------------------------------------------------------ GridField

GridField::GridField(std::size_t resolution, std::size_t components)
    : n_(resolution), components_(components), values_(resolution * resolution * components) {
    if (resolution < 32) {
        throw Error(ErrorKind::kInvalidInput,
                    "grid resolution must be >= 32, got " + std::to_string(resolution));
    }
    if (components == 0) throw Error(ErrorKind::kInvalidInput, "grid needs >= 1 component");
}

GridField GridField::from_function(std::size_t resolution,
                                   const std::function<double(const Vec2&)>& f) {
    GridField g(resolution, 1);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            g.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)) = f(g.point(i, j));
        }
    }
    return g;
}

GridField GridField::from_vector_function(std::size_t resolution,
                                          const std::function<Vec2(const Vec2&)>& f) {
    GridField g(resolution, 2);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const Vec2 v = f(g.point(i, j));
            const auto ii = static_cast<std::ptrdiff_t>(i);
            const auto jj = static_cast<std::ptrdiff_t>(j);
            g.at(ii, jj, 0) = v.x();
            g.at(ii, jj, 1) = v.y();
        }
    }
    return g;
}

Vec2 GridField::point(std::size_t i, std::size_t j) const {
    const double h = spacing();
    return Vec2(-kPi + h * static_cast<double>(i), -kPi + h * static_cast<double>(j));
}

std::size_t GridField::index(std::ptrdiff_t i, std::ptrdiff_t j, std::size_t c) const {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    const auto ii = static_cast<std::size_t>(((i % n) + n) % n);
    const auto jj = static_cast<std::size_t>(((j % n) + n) % n);
    return (ii * n_ + jj) * components_ + c;
}

double& GridField::at(std::ptrdiff_t i, std::ptrdiff_t j, std::size_t c) {
    return values_[index(i, j, c)];
}

double GridField::at(std::ptrdiff_t i, std::ptrdiff_t j, std::size_t c) const {
    return values_[index(i, j, c)];
}

double GridField::sum(std::size_t c) const {
    double s = 0.0;
    for (std::size_t k = c; k < values_.size(); k += components_) s += values_[k];
    return s;
}

double GridField::max_abs(std::size_t c) const {
    double m = 0.0;
    for (std::size_t k = c; k < values_.size(); k += components_) m = std::max(m, std::abs(values_[k]));
    return m;
}

double GridField::l2_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s * cell_area());
}

// ------------------------------------------------------------- reconstruction

namespace {

/// Row k holds exp(-d^2 / 2 s^2) of the wrapped 1-D displacement between
/// grid coordinate i and agent k along one axis.
Eigen::MatrixXd axis_kernel(std::span<const TorusPoint> positions, std::size_t axis,
                            double bandwidth, std::size_t resolution) {
    const double h = kTwoPi / static_cast<double>(resolution);
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    Eigen::MatrixXd k(static_cast<Eigen::Index>(resolution),
                      static_cast<Eigen::Index>(positions.size()));
    for (std::size_t p = 0; p < positions.size(); ++p) {
        const double xp = axis == 0 ? positions[p].x1() : positions[p].x2();
        for (std::size_t i = 0; i < resolution; ++i) {
            const TorusPoint g = TorusPoint::wrap(-kPi + h * static_cast<double>(i), 0.0);
            const TorusPoint a = TorusPoint::wrap(xp, 0.0);
            const double d = wrapped_displacement(g, a).d.x();
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = std::exp(-d * d * inv);
        }
    }
    return k;
}

constexpr std::size_t kChunk = 4096;

}  // namespace

GridField kde_density(std::span<const TorusPoint> positions, double bandwidth,
                      std::size_t resolution) {
    if (positions.empty()) throw Error(ErrorKind::kInvalidInput, "kde_density: no positions");
    if (!(bandwidth > 0.0)) throw Error(ErrorKind::kInvalidInput, "kde_density: bandwidth <= 0");
    GridField out(resolution, 1);
    const auto n = static_cast<Eigen::Index>(resolution);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t start = 0; start < positions.size(); start += kChunk) {
        const auto chunk = positions.subspan(start, std::min(kChunk, positions.size() - start));
        acc.noalias() += axis_kernel(chunk, 0, bandwidth, resolution) *
                         axis_kernel(chunk, 1, bandwidth, resolution).transpose();
    }
    const double norm = acc.sum() * out.cell_area();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out.at(i, j) = acc(i, j) / norm;
    }
    return out;
}

GridField reconstruct_velocity_field(std::span<const TorusPoint> positions,
                                     std::span<const Vec2> velocities, double bandwidth,
                                     std::size_t resolution) {
    if (positions.size() != velocities.size() || positions.empty()) {
        throw Error(ErrorKind::kInvalidInput, "reconstruct_velocity_field: bad inputs");
    }
    GridField out(resolution, 2);
    const auto n = static_cast<Eigen::Index>(resolution);
    Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd num1 = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd num2 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t start = 0; start < positions.size(); start += kChunk) {
        const std::size_t len = std::min(kChunk, positions.size() - start);
        const auto chunk = positions.subspan(start, len);
        const Eigen::MatrixXd k1 = axis_kernel(chunk, 0, bandwidth, resolution);
        const Eigen::MatrixXd k2 = axis_kernel(chunk, 1, bandwidth, resolution);
        Eigen::VectorXd u1(static_cast<Eigen::Index>(len)), u2(static_cast<Eigen::Index>(len));
        for (std::size_t p = 0; p < len; ++p) {
            u1(static_cast<Eigen::Index>(p)) = velocities[start + p].x();
            u2(static_cast<Eigen::Index>(p)) = velocities[start + p].y();
        }
        weight.noalias() += k1 * k2.transpose();
        num1.noalias() += k1 * u1.asDiagonal() * k2.transpose();
        num2.noalias() += k1 * u2.asDiagonal() * k2.transpose();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double w = weight(i, j);
            out.at(i, j, 0) = w > 0.0 ? num1(i, j) / w : 0.0;
            out.at(i, j, 1) = w > 0.0 ? num2(i, j) / w : 0.0;
        }
    }
    return out;
}

double l2_error(const GridField& field, const GridField& target) {
    if (field.resolution() != target.resolution() || field.components() != target.components()) {
        throw Error(ErrorKind::kInvalidInput, "l2_error: mismatched grids");
    }
    const auto n = static_cast<std::ptrdiff_t>(field.resolution());
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            for (std::size_t c = 0; c < field.components(); ++c) {
                const double e = field.at(i, j, c) - target.at(i, j, c);
                s += e * e;
            }
        }
    }
    return std::sqrt(s * field.cell_area());
}

GridField divergence(const GridField& w) {
    if (w.components() != 2) throw Error(ErrorKind::kInvalidInput, "divergence: need a 2-vector field");
    GridField out(w.resolution(), 1);
    const auto n = static_cast<std::ptrdiff_t>(w.resolution());
    const double inv2h = 1.0 / (2.0 * w.spacing());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            out.at(i, j) = (w.at(i + 1, j, 0) - w.at(i - 1, j, 0) + w.at(i, j + 1, 1) -
                            w.at(i, j - 1, 1)) *
                           inv2h;
        }
    }
    return out;
}

GridField laplacian(const GridField& f) {
    if (f.components() != 1) throw Error(ErrorKind::kInvalidInput, "laplacian: need a scalar field");
    GridField out(f.resolution(), 1);
    const auto n = static_cast<std::ptrdiff_t>(f.resolution());
    const double inv_h2 = 1.0 / (f.spacing() * f.spacing());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            out.at(i, j) = (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) -
                            4.0 * f.at(i, j)) *
                           inv_h2;
        }
    }
    return out;
}

StabilityReport stability_constants(const GridField& w_field, const GridField& rho_bar,
                                    double diffusion) {
    if (w_field.resolution() != rho_bar.resolution() || w_field.components() != 2 ||
        rho_bar.components() != 1) {
        throw Error(ErrorKind::kInvalidInput, "stability_constants: mismatched grids");
    }
    if (w_field.resolution() < 64) {
        throw Error(ErrorKind::kInvalidInput, "stability_constants: resolution must be >= 64");
    }
    const auto n = static_cast<std::ptrdiff_t>(w_field.resolution());
    GridField rho_w(w_field.resolution(), 2);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            rho_w.at(i, j, 0) = rho_bar.at(i, j) * w_field.at(i, j, 0);
            rho_w.at(i, j, 1) = rho_bar.at(i, j) * w_field.at(i, j, 1);
        }
    }
    StabilityReport r;
    r.diffusion = diffusion;
    r.div_w_inf = divergence(w_field).max_abs();
    r.div_rho_w_l2 = divergence(rho_w).l2_norm();
    r.lap_rho_l2 = laplacian(rho_bar).l2_norm();
    r.a = 2.0 * diffusion - r.div_w_inf;
    r.b = std::sqrt(2.0) * (r.div_rho_w_l2 + r.lap_rho_l2);
    r.condition_ok = diffusion > 0.5 * r.div_w_inf;
    if (r.a > 0.0) r.bound = (r.b / r.a) * (r.b / r.a);
    return r;
}

double chi2_to_uniform(std::span<const TorusPoint> positions, std::size_t bins) {
    if (positions.empty() || bins == 0) {
        throw Error(ErrorKind::kInvalidInput, "chi2_to_uniform: empty input");
    }
    std::vector<double> counts(bins * bins, 0.0);
    const double h = kTwoPi / static_cast<double>(bins);
    for (const TorusPoint& p : positions) {
        const auto i = std::min(bins - 1, static_cast<std::size_t>((p.x1() + kPi) / h));
        const auto j = std::min(bins - 1, static_cast<std::size_t>((p.x2() + kPi) / h));
        counts[i * bins + j] += 1.0;
    }
    const double expected = static_cast<double>(positions.size()) / static_cast<double>(bins * bins);
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    return chi2;
}

// ------------------------------------------------------------------ ensembles

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::kBarrierLeaders: return "H_L";
        case Metric::kBarrierFollowers: return "H_F";
        case Metric::kFracInLeaders: return "frac_in_L";
        case Metric::kFracInFollowers: return "frac_in_F";
        case Metric::kFracGoal: return "frac_goal";
        case Metric::kDeviation: return "deviation";
        case Metric::kViolations: return "violations";
    }
    return "";
}

double metric_value(const MetricRow& row, Metric m) {
    switch (m) {
        case Metric::kBarrierLeaders: return row.barrier_leaders;
        case Metric::kBarrierFollowers: return row.barrier_followers;
        case Metric::kFracInLeaders: return row.frac_in_leaders;
        case Metric::kFracInFollowers: return row.frac_in_followers;
        case Metric::kFracGoal: return row.frac_goal;
        case Metric::kDeviation: return row.deviation;
        case Metric::kViolations: return static_cast<double>(row.violations);
    }
    return kBlank;
}

EnsembleStats ensemble_stats(std::span<const RunRecord> records) {
    if (records.empty()) throw Error(ErrorKind::kInvalidInput, "ensemble_stats: no records");
    const std::vector<MetricRow>& ref = records.front().rows;
    for (const RunRecord& r : records) {
        if (r.rows.size() != ref.size()) {
            throw Error(ErrorKind::kInvalidInput, "ensemble_stats: inconsistent time grids");
        }
        for (std::size_t i = 0; i < ref.size(); ++i) {
            if (std::abs(r.rows[i].t - ref[i].t) > 1e-9) {
                throw Error(ErrorKind::kInvalidInput, "ensemble_stats: inconsistent time grids");
            }
        }
    }
    EnsembleStats out;
    out.runs = records.size();
    for (const MetricRow& row : ref) out.t.push_back(row.t);
    const double n = static_cast<double>(records.size());
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        out.mean[m].resize(ref.size());
        out.std[m].resize(ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            double s = 0.0;
            for (const RunRecord& r : records) s += metric_value(r.rows[i], static_cast<Metric>(m));
            const double mean = s / n;
            double ss = 0.0;
            for (const RunRecord& r : records) {
                const double d = metric_value(r.rows[i], static_cast<Metric>(m)) - mean;
                ss += d * d;
            }
            out.mean[m][i] = mean;
            out.std[m][i] = records.size() > 1 ? std::sqrt(ss / (n - 1.0)) : (std::isnan(mean) ? mean : 0.0);
        }
    }
    return out;
}

}  // namespace mfcbf
