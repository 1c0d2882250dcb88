#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "bifbm/estimators.hpp"
#include "bifbm/functions.hpp"
#include "bifbm/sampler.hpp"

namespace bifbm {

enum class LocalTimeKernel { boxcar, gaussian };

// Estimated local time L(x_k, t_e) for every path of a batch.
//   boxcar:   L(x,t) = (dt / 2h) #{i : t_i < t, |B(t_i) - x| < h}
//   gaussian: L(x,t) = dt sum_{t_i < t} phi_{h^2}(B(t_i) - x)
class LocalTimeField {
public:
    LocalTimeField(std::vector<double> space_grid, std::vector<double> eval_times, double bandwidth,
                   LocalTimeKernel kernel, std::size_t n_paths, std::vector<double> values);

    std::span<const double> space_grid() const noexcept { return space_; }
    std::span<const double> eval_times() const noexcept { return times_; }
    double bandwidth() const noexcept { return bandwidth_; }
    LocalTimeKernel kernel() const noexcept { return kernel_; }
    std::size_t n_paths() const noexcept { return n_paths_; }

    // Position of t in eval_times; throws DomainError if absent.
    std::size_t time_index(double t) const;
    // Position of x in the space grid (tolerance 1e-9 of the local spacing); throws DomainError if absent.
    std::size_t space_index(double x) const;

    // L(x_k, t_e) on path `path`.
    double at(std::size_t path, std::size_t k, std::size_t e) const noexcept {
        return values_[(path * times_.size() + e) * space_.size() + k];
    }
    std::span<const double> slice(std::size_t path, std::size_t e) const noexcept {
        return {values_.data() + (path * times_.size() + e) * space_.size(), space_.size()};
    }
    // L(x, t_e), linear in x between grid nodes and 0 outside the grid.
    double interpolate(std::size_t path, double x, std::size_t e) const noexcept;
    // Trapezoidal int L(x, t_e) dx over the space grid.
    double mass(std::size_t path, std::size_t e) const noexcept;

private:
    std::vector<double> space_;
    std::vector<double> times_;
    double bandwidth_;
    LocalTimeKernel kernel_;
    std::size_t n_paths_;
    std::vector<double> values_;
};

// 201 uniform nodes over [-4 sqrt(T), 4 sqrt(T)].
std::vector<double> default_space_grid(double T);
// sqrt(dt) rounded to a whole number (at least one) of half space-grid
// spacings. Each boxcar window then holds a fixed number of nodes, so the
// trapezoidal mass of L in x equals the elapsed time.
double default_bandwidth(const TimeGrid& grid, std::span<const double> space_grid);

LocalTimeField local_time(const PathBatch& batch, std::span<const double> space_grid,
                          std::span<const double> eval_times, double bandwidth,
                          LocalTimeKernel kernel = LocalTimeKernel::boxcar);

// Field at the default space grid and bandwidth.
LocalTimeField local_time(const PathBatch& batch, std::span<const double> eval_times);

// CSV `path_id,x,t,L`.
void write_local_time_csv(const LocalTimeField& field, std::ostream& out);

// Per-path relative gap |int psi(x) L(x,t) dx - int_0^t psi(B_s) ds| / |int_0^t psi(B_s) ds|
// (left Riemann sum in time, trapezoid in space). The gap is 0 when both sides
// agree exactly, including psi = 0.
EstimateReport occupation_check(const PathBatch& batch, const LocalTimeField& field, const ScalarFunction& psi,
                                double t);
EstimateReport occupation_check(const PathBatch& batch, const ScalarFunction& psi, double t);

// sum_j f_j [L(a_j, t) - L(a_{j-1}, t)] per path.
std::vector<double> integral_wrt_localtime(const StepFunction& f, const LocalTimeField& field, double t);

// J_eps(f, t) + 2^{1-K} int f(x) L(dx, t), per path.
EstimateReport bouleau_yor_residual(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg,
                                    const LocalTimeField& field);

// int f(x) L(dx, t) + 2^{K-1} J_eps(f, t), per path: the same identity solved
// for the local-time sum.
EstimateReport local_time_sum_residual(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg,
                                       const LocalTimeField& field);

// |B_t - x| - |x| - forward(sign(. - x)) - 2^{1-K} L(x, t), per path, with
// sign(0) = -1. x must be a node of the field's space grid.
EstimateReport tanaka_residual(const PathBatch& batch, const EstimatorConfig& cfg, const LocalTimeField& field,
                               double x);

// zeta(x) = c exp(1 / ((x-1)^2 - 1)) on (0, 2), zeta_n(x) = n zeta(n x).
struct MollifierFamily {
    std::size_t order = 1;

    // c = 1 / int_0^2 exp(1 / ((x-1)^2 - 1)) dx.
    static double normalizing_constant();

    double density(double x) const;
    double derivative(double x) const;
    // int_{-inf}^{x} zeta_n.
    double cdf(double x) const;
    // int zeta_n by adaptive quadrature.
    double mass() const;
};

// f_n = f * zeta_n with f_n' built from zeta_n; smoothness tag `smooth`.
ScalarFunction mollify(const StepFunction& f, std::size_t n);

// hnorm(f_n - f, T) with the integration split where either function bends.
double mollifier_gap(const StepFunction& f, std::size_t n, double T);

}  // namespace bifbm
