#include "bifbm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "bifbm/errors.hpp"
#include "bifbm/parallel.hpp"

namespace bifbm {

std::vector<std::size_t> EstimatorConfig::validate(const PathBatch& batch) const {
    const TimeGrid& grid = batch.grid();
    if (epsilon_steps < 1) throw DomainError("EstimatorConfig: epsilon must be a positive multiple of dt");
    if (eval_times.empty()) throw DomainError("EstimatorConfig: at least one eval time is required");
    std::vector<std::size_t> idx;
    idx.reserve(eval_times.size());
    for (double t : eval_times) {
        if (!(t > 0.0)) throw DomainError("EstimatorConfig: eval times must be > 0");
        const std::size_t k = grid.index_of(t);
        if (k + epsilon_steps > grid.size() - 1) {
            throw DomainError("EstimatorConfig: eval time " + std::to_string(t) +
                              " + epsilon exceeds the padded grid (pad = " + std::to_string(grid.pad()) + ")");
        }
        idx.push_back(k);
    }
    return idx;
}

ReportEcho make_echo(const PathBatch& batch, double epsilon) {
    const TimeGrid& g = batch.grid();
    return {batch.params(), g.horizon(), g.steps(), g.pad(), epsilon, batch.seed()};
}

EstimateReport EstimateReport::from_samples(std::string label, ReportEcho echo, std::span<const double> times,
                                            std::vector<std::vector<double>> samples) {
    if (samples.size() != times.size()) throw DomainError("EstimateReport: one sample vector per eval time");
    EstimateReport r{std::move(label), echo, {}, std::move(samples)};
    r.rows.reserve(times.size());
    for (std::size_t e = 0; e < times.size(); ++e) {
        const auto& v = r.samples[e];
        const std::size_t n = v.size();
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = n ? sum / static_cast<double>(n) : 0.0;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        r.rows.push_back({times[e], mean, se, n});
    }
    return r;
}

const EstimateRow& EstimateReport::at(double t) const {
    for (const auto& row : rows) {
        if (std::abs(row.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return row;
    }
    throw DomainError("EstimateReport '" + label + "': no row at t = " + std::to_string(t));
}

const std::vector<double>& EstimateReport::samples_at(double t) const {
    for (std::size_t e = 0; e < rows.size(); ++e) {
        if (std::abs(rows[e].t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return samples[e];
    }
    throw DomainError("EstimateReport '" + label + "': no samples at t = " + std::to_string(t));
}

EstimateReport EstimateReport::combined(double alpha, const EstimateReport& other, double beta,
                                        std::string new_label) const {
    if (other.samples.size() != samples.size()) throw DomainError("EstimateReport::combined: row count mismatch");
    std::vector<std::vector<double>> out(samples.size());
    std::vector<double> times;
    for (std::size_t e = 0; e < samples.size(); ++e) {
        if (other.samples[e].size() != samples[e].size()) {
            throw DomainError("EstimateReport::combined: path count mismatch");
        }
        out[e].resize(samples[e].size());
        for (std::size_t k = 0; k < samples[e].size(); ++k) {
            out[e][k] = alpha * samples[e][k] + beta * other.samples[e][k];
        }
        times.push_back(rows[e].t);
    }
    return from_samples(std::move(new_label), echo, times, std::move(out));
}

EstimateReport EstimateReport::absolute(std::string new_label) const {
    auto out = samples;
    for (auto& v : out) {
        for (double& x : v) x = std::abs(x);
    }
    std::vector<double> times;
    for (const auto& row : rows) times.push_back(row.t);
    return from_samples(std::move(new_label), echo, times, std::move(out));
}

namespace {

using RealFn = std::function<double(double)>;

enum class Sum { forward, backward, covariation, variation };

// One windowed Riemann sum per path and eval time, scaled by dt/eps = 1/m.
EstimateReport window_sum(const char* label, Sum kind, const RealFn& f, const PathBatch& batch,
                          const EstimatorConfig& cfg) {
    const auto idx = cfg.validate(batch);
    const std::size_t m = cfg.epsilon_steps;
    const std::size_t last = *std::max_element(idx.begin(), idx.end());
    std::vector<std::size_t> order(idx.size());
    for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });

    std::vector<std::vector<double>> samples(idx.size(), std::vector<double>(batch.n_paths()));
    const double inv_m = 1.0 / static_cast<double>(m);
    parallel_for(batch.n_paths(), [&](std::size_t k) {
        const auto b = batch.path(k);
        std::vector<double> fv;
        if (kind != Sum::variation) {
            fv.resize(last + m + 1);
            for (std::size_t i = 0; i <= last + m; ++i) fv[i] = f(b[i]);
        }
        double acc = 0.0;
        std::size_t i = 0;
        for (std::size_t e : order) {
            for (; i < idx[e]; ++i) {
                const double d = b[i + m] - b[i];
                switch (kind) {
                    case Sum::forward: acc += fv[i] * d; break;
                    case Sum::backward: acc += fv[i + m] * d; break;
                    case Sum::covariation: acc += (fv[i + m] - fv[i]) * d; break;
                    case Sum::variation: acc += d * d; break;
                }
            }
            samples[e][k] = acc * inv_m;
        }
    });
    return EstimateReport::from_samples(label, make_echo(batch, cfg.epsilon(batch.grid())), cfg.eval_times,
                                        std::move(samples));
}

RealFn as_fn(const ScalarFunction& f) {
    return [&f](double x) { return f(x); };
}

RealFn as_fn(const StepFunction& f) {
    return [&f](double x) { return f(x); };
}

}  // namespace

EstimateReport quadratic_variation(const PathBatch& batch, const EstimatorConfig& cfg) {
    return window_sum("quadratic_variation", Sum::variation, {}, batch, cfg);
}

EstimateReport quadratic_covariation(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    return window_sum("quadratic_covariation", Sum::covariation, as_fn(f), batch, cfg);
}

EstimateReport quadratic_covariation(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    return window_sum("quadratic_covariation", Sum::covariation, as_fn(f), batch, cfg);
}

EstimateReport forward_integral(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    return window_sum("forward_integral", Sum::forward, as_fn(f), batch, cfg);
}

EstimateReport forward_integral(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    return window_sum("forward_integral", Sum::forward, as_fn(f), batch, cfg);
}

EstimateReport backward_integral(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    return window_sum("backward_integral", Sum::backward, as_fn(f), batch, cfg);
}

EstimateReport backward_integral(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    return window_sum("backward_integral", Sum::backward, as_fn(f), batch, cfg);
}

namespace {

EstimateReport skorohod_from(const EstimateReport& forward, const EstimateReport& covariation,
                             const ModelParams& p) {
    return forward.combined(1.0, covariation, -p.skorohod_correction(), "skorohod_integral");
}

}  // namespace

EstimateReport skorohod_integral(const ScalarFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    batch.params().require_critical("skorohod_integral");
    return skorohod_from(forward_integral(f, batch, cfg), quadratic_covariation(f, batch, cfg), batch.params());
}

EstimateReport skorohod_integral(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg) {
    batch.params().require_critical("skorohod_integral");
    return skorohod_from(forward_integral(f, batch, cfg), quadratic_covariation(f, batch, cfg), batch.params());
}

EstimateReport smooth_reference(const ScalarFunction& f, const PathBatch& batch, std::span<const double> eval_times) {
    batch.params().require_critical("smooth_reference");
    if (!f.has_derivative()) throw DomainError("smooth_reference: f needs a derivative handle");
    if (eval_times.empty()) throw DomainError("smooth_reference: at least one eval time is required");
    const TimeGrid& grid = batch.grid();
    std::vector<std::size_t> idx;
    for (double t : eval_times) idx.push_back(grid.index_of(t));
    std::vector<std::size_t> order(idx.size());
    for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });

    const double scale = batch.params().qv_constant() * grid.dt();
    std::vector<std::vector<double>> samples(idx.size(), std::vector<double>(batch.n_paths()));
    parallel_for(batch.n_paths(), [&](std::size_t k) {
        const auto b = batch.path(k);
        double acc = 0.0;
        std::size_t i = 0;
        for (std::size_t e : order) {
            for (; i < idx[e]; ++i) acc += f.derivative(b[i]);
            samples[e][k] = scale * acc;
        }
    });
    return EstimateReport::from_samples("smooth_reference", make_echo(batch, 0.0), eval_times, std::move(samples));
}

namespace {

EstimateReport ito_from(const ScalarFunction& F, const EstimateReport& forward, const EstimateReport& covariation,
                        const PathBatch& batch, const EstimatorConfig& cfg, ItoMode mode) {
    const ModelParams& p = batch.params();
    p.require_critical("ito_residual");
    const auto idx = cfg.validate(batch);
    const double F0 = F(0.0);

    // Both modes reduce to F(B_t) - F(0) - forward - (1/2) J; they differ only in
    // how the terms are grouped.
    EstimateReport integral = forward;
    double correction = 0.5;
    if (mode == ItoMode::skorohod) {
        integral = skorohod_from(forward, covariation, p);
        correction = p.ito_constant();
    }

    std::vector<std::vector<double>> samples(idx.size(), std::vector<double>(batch.n_paths()));
    for (std::size_t e = 0; e < idx.size(); ++e) {
        for (std::size_t k = 0; k < batch.n_paths(); ++k) {
            const double value = F(batch.path(k)[idx[e]]);
            samples[e][k] = value - F0 - integral.samples[e][k] - correction * covariation.samples[e][k];
        }
    }
    const char* label = mode == ItoMode::forward ? "ito_residual_forward" : "ito_residual_skorohod";
    return EstimateReport::from_samples(label, forward.echo, cfg.eval_times, std::move(samples));
}

}  // namespace

EstimateReport ito_residual(const ScalarFunction& F, const ScalarFunction& f, const PathBatch& batch,
                            const EstimatorConfig& cfg, ItoMode mode) {
    return ito_from(F, forward_integral(f, batch, cfg), quadratic_covariation(f, batch, cfg), batch, cfg, mode);
}

EstimateReport ito_residual(const ScalarFunction& F, const StepFunction& f, const PathBatch& batch,
                            const EstimatorConfig& cfg, ItoMode mode) {
    return ito_from(F, forward_integral(f, batch, cfg), quadratic_covariation(f, batch, cfg), batch, cfg, mode);
}

}  // namespace bifbm
