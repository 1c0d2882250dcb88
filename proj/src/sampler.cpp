#include "bifbm/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "bifbm/errors.hpp"
#include "bifbm/kernel.hpp"
#include "bifbm/parallel.hpp"
#include "bifbm/rng.hpp"

namespace bifbm {

TimeGrid::TimeGrid(double T, std::size_t steps, std::size_t pad) : T_(T), steps_(steps), pad_(pad) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("TimeGrid: horizon T must be finite and > 0");
    if (steps < 1) throw DomainError("TimeGrid: steps must be >= 1");
}

TimeGrid TimeGrid::with_epsilon(double T, std::size_t steps, double eps_max) {
    if (!(eps_max >= 0.0)) throw DomainError("TimeGrid: eps_max must be >= 0");
    const double dt = T / static_cast<double>(steps);
    const auto pad = static_cast<std::size_t>(std::ceil(eps_max / dt - 1e-9));
    return TimeGrid(T, steps, pad);
}

std::size_t TimeGrid::index_of(double t) const {
    const double q = t / dt();
    const double r = std::round(q);
    if (!(r >= 0.0) || std::abs(q - r) > 1e-9 * std::max(1.0, r) || r > static_cast<double>(size() - 1)) {
        throw DomainError("TimeGrid: t = " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<std::size_t>(r);
}

PathBatch::PathBatch(TimeGrid grid, ModelParams params, std::uint64_t seed, std::size_t n_paths,
                     std::vector<double> values)
    : grid_(grid), params_(params), seed_(seed), n_paths_(n_paths), values_(std::move(values)) {
    if (n_paths_ < 1) throw DomainError("PathBatch: n_paths must be >= 1");
    if (values_.size() != n_paths_ * grid_.size()) {
        throw DomainError("PathBatch: expected " + std::to_string(n_paths_ * grid_.size()) + " values, got " +
                          std::to_string(values_.size()));
    }
}

Matrix build_cov_matrix(const ModelParams& p, std::span<const double> times) {
    const auto n = static_cast<Eigen::Index>(times.size());
    const double H2 = 2.0 * p.H();
    const double K = p.K();
    const double HK2 = H2 * K;
    const double scale = std::exp2(-K);
    std::vector<double> powered(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) throw DomainError("build_cov_matrix: times must be > 0");
        powered[i] = std::pow(times[i], H2);
    }
    Matrix c(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double lag = std::abs(times[i] - times[j]);
            const double v = scale * (std::pow(powered[i] + powered[j], K) - std::pow(lag, HK2));
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

Matrix build_cov_matrix(const ModelParams& p, const TimeGrid& grid) {
    std::vector<double> times(grid.size() - 1);
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = grid.node(i + 1);
    return build_cov_matrix(p, times);
}

namespace {

// Row-oriented Cholesky-Banachiewicz. Returns the failing pivot, or -1.
Eigen::Index factor_in_place(const Matrix& a, double shift, Matrix& l) {
    const Eigen::Index n = a.rows();
    l.setZero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double dot = j > 0 ? l.row(i).head(j).dot(l.row(j).head(j)) : 0.0;
            l(i, j) = (a(i, j) - dot) / l(j, j);
        }
        const double d = a(i, i) + shift - (i > 0 ? l.row(i).head(i).squaredNorm() : 0.0);
        if (!(d > 0.0) || !std::isfinite(d)) return i;
        l(i, i) = std::sqrt(d);
    }
    return -1;
}

}  // namespace

CholeskyFactor cholesky_factor(const Matrix& a) {
    if (a.rows() != a.cols()) throw DomainError("cholesky_factor: matrix must be square");
    CholeskyFactor out;
    if (a.rows() == 0) return out;
    const double max_diag = a.diagonal().cwiseAbs().maxCoeff();

    Eigen::Index pivot = factor_in_place(a, 0.0, out.lower);
    if (pivot < 0) return out;
    for (double rel = 1e-12; rel <= 1e-8 * (1.0 + 1e-9); rel *= 10.0) {
        const double jitter = rel * max_diag;
        pivot = factor_in_place(a, jitter, out.lower);
        if (pivot < 0) {
            out.jitter = jitter;
            return out;
        }
    }
    throw FactorizationError("cholesky_factor: matrix not positive definite at pivot " + std::to_string(pivot) +
                                 " after jitter escalation to 1e-8 * max diagonal",
                             static_cast<std::size_t>(pivot));
}

PathBatch sample_paths(const ModelParams& p, const TimeGrid& grid, const CholeskyFactor& factor,
                       std::size_t n_paths, std::uint64_t seed) {
    if (n_paths < 1) throw DomainError("sample_paths: n_paths must be >= 1");
    const auto n = static_cast<Eigen::Index>(grid.size() - 1);
    if (factor.lower.rows() != n) throw DomainError("sample_paths: factor size does not match the grid");

    const std::size_t stride = grid.size();
    std::vector<double> values(n_paths * stride, 0.0);
    parallel_for(n_paths, [&](std::size_t k) {
        rng::Stream stream(seed, k);
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z[i] = stream.normal();
        double* out = values.data() + k * stride;
        out[0] = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            out[i + 1] = factor.lower.row(i).head(i + 1).dot(z.head(i + 1).transpose());
        }
    });
    return PathBatch(grid, p, seed, n_paths, std::move(values));
}

PathBatch sample_paths(const ModelParams& p, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    return sample_paths(p, grid, cholesky_factor(build_cov_matrix(p, grid)), n_paths, seed);
}

void write_paths_csv(const PathBatch& batch, std::ostream& out) {
    out << "path_id,t,value\n";
    char line[96];
    for (std::size_t k = 0; k < batch.n_paths(); ++k) {
        const auto path = batch.path(k);
        for (std::size_t i = 0; i < path.size(); ++i) {
            std::snprintf(line, sizeof line, "%zu,%.12g,%.17g\n", k, batch.grid().node(i), path[i]);
            out << line;
        }
    }
}

}  // namespace bifbm
