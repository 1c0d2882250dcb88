#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bifbm/params.hpp"

namespace bifbm {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Uniform grid t_i = i * T / steps for i = 0..steps+pad. Nodes past T exist so
// that integrands shifted by epsilon stay on the grid.
class TimeGrid {
public:
    TimeGrid(double T, std::size_t steps, std::size_t pad = 0);

    // Pad chosen as ceil(eps_max / dt).
    static TimeGrid with_epsilon(double T, std::size_t steps, double eps_max);

    double horizon() const noexcept { return T_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t pad() const noexcept { return pad_; }
    std::size_t size() const noexcept { return steps_ + pad_ + 1; }
    double dt() const noexcept { return T_ / static_cast<double>(steps_); }
    double node(std::size_t i) const noexcept { return static_cast<double>(i) * dt(); }
    double last() const noexcept { return node(size() - 1); }

    // Index of the node equal to t (relative tolerance 1e-9 of dt); throws DomainError otherwise.
    std::size_t index_of(double t) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double T_;
    std::size_t steps_;
    std::size_t pad_;
};

// Immutable batch of sampled trajectories, stored path-major.
class PathBatch {
public:
    PathBatch(TimeGrid grid, ModelParams params, std::uint64_t seed, std::size_t n_paths, std::vector<double> values);

    const TimeGrid& grid() const noexcept { return grid_; }
    const ModelParams& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t n_paths() const noexcept { return n_paths_; }

    std::span<const double> path(std::size_t k) const noexcept {
        return {values_.data() + k * grid_.size(), grid_.size()};
    }
    std::span<const double> values() const noexcept { return values_; }

private:
    TimeGrid grid_;
    ModelParams params_;
    std::uint64_t seed_;
    std::size_t n_paths_;
    std::vector<double> values_;
};

// [R(t_i, t_j)] over nodes i, j >= 1 (t_0 = 0 gives a zero row and is dropped).
Matrix build_cov_matrix(const ModelParams& p, const TimeGrid& grid);
// Same for an explicit list of positive times.
Matrix build_cov_matrix(const ModelParams& p, std::span<const double> times);

struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;  // diagonal shift that made the factorization succeed
};

// Lower-triangular L with L L^T = A. On a non-positive pivot the diagonal is
// shifted by 1e-12 * max(diag), escalated tenfold up to 1e-8 * max(diag);
// after that FactorizationError reports the failing pivot.
CholeskyFactor cholesky_factor(const Matrix& a);

// n_paths exact samples B = L z with z drawn from the Philox substream
// (seed, path index); B(t_0) = 0. Output is independent of thread count.
PathBatch sample_paths(const ModelParams& p, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

// Same, reusing a factor of build_cov_matrix(p, grid).
PathBatch sample_paths(const ModelParams& p, const TimeGrid& grid, const CholeskyFactor& factor,
                       std::size_t n_paths, std::uint64_t seed);

// CSV `path_id,t,value`, one row per node per path.
void write_paths_csv(const PathBatch& batch, std::ostream& out);

}  // namespace bifbm
