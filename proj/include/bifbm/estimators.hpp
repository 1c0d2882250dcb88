#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bifbm/functions.hpp"
#include "bifbm/sampler.hpp"

namespace bifbm {

// epsilon = epsilon_steps * dt; every eval time must be a grid node with
// eval_time + epsilon inside the padded grid.
struct EstimatorConfig {
    std::size_t epsilon_steps = 16;
    std::vector<double> eval_times{1.0};

    double epsilon(const TimeGrid& grid) const { return static_cast<double>(epsilon_steps) * grid.dt(); }
    // Grid indices of eval_times; throws DomainError on any mismatch with the batch.
    std::vector<std::size_t> validate(const PathBatch& batch) const;
};

struct ReportEcho {
    ModelParams params{0.5, 1.0};
    double T = 1.0;
    std::size_t steps = 0;
    std::size_t pad = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

struct EstimateRow {
    double t = 0.0;
    double mean = 0.0;
    double std_error = 0.0;  // sample std (n-1) / sqrt(n); 0 for a single path
    std::size_t n_paths = 0;
};

// Monte Carlo aggregate of a per-path quantity at each eval time. `samples`
// keeps the per-path values ([row][path]) so identities can be checked path by path.
struct EstimateReport {
    std::string label;
    ReportEcho echo;
    std::vector<EstimateRow> rows;
    std::vector<std::vector<double>> samples;

    // Aggregates in path-index order.
    static EstimateReport from_samples(std::string label, ReportEcho echo, std::span<const double> times,
                                       std::vector<std::vector<double>> samples);

    const EstimateRow& at(double t) const;
    const std::vector<double>& samples_at(double t) const;

    // Per-path alpha * this + beta * other (same shape required).
    EstimateReport combined(double alpha, const EstimateReport& other, double beta, std::string new_label) const;
    // Per-path absolute values.
    EstimateReport absolute(std::string new_label) const;
};

ReportEcho make_echo(const PathBatch& batch, double epsilon);

// (1/eps) int_0^t (B_{s+eps} - B_s)^2 ds, left-endpoint rule.
EstimateReport quadratic_variation(const PathBatch& batch, const EstimatorConfig& cfg);

// J_eps(f, t) = (1/eps) int_0^t (f(B_{s+eps}) - f(B_s)) (B_{s+eps} - B_s) ds.
EstimateReport quadratic_covariation(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);
EstimateReport quadratic_covariation(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);

// (1/eps) int_0^t f(B_s) (B_{s+eps} - B_s) ds.
EstimateReport forward_integral(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);
EstimateReport forward_integral(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);

// (1/eps) int_0^t f(B_{s+eps}) (B_{s+eps} - B_s) ds.
EstimateReport backward_integral(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);
EstimateReport backward_integral(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);

// Forward integral minus (1/2)(2^{K-1} - 1) J_eps(f, t).
EstimateReport skorohod_integral(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);
EstimateReport skorohod_integral(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg);

// 2^{1-K} int_0^t f'(B_s) ds, left-endpoint rule; f needs a derivative handle.
EstimateReport smooth_reference(const ScalarFunction& f, const PathBatch& batch, std::span<const double> eval_times);

enum class ItoMode { forward, skorohod };

// F(B_t) - F(0) - (integral of f) - (correction), with
//   forward:  forward integral,  correction (1/2) J_eps(f, t)
//   skorohod: Skorohod integral, correction 2^{K-2} J_eps(f, t).
// The caller asserts F' = f.
EstimateReport ito_residual(const ScalarFunction& F, const ScalarFunction& f, const PathBatch& batch,
                            const EstimatorConfig& cfg, ItoMode mode);
EstimateReport ito_residual(const ScalarFunction& F, const StepFunction& f, const PathBatch& batch,
                            const EstimatorConfig& cfg, ItoMode mode);

}  // namespace bifbm
