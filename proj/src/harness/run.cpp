#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <string>

#include "bifbm/errors.hpp"
#include "bifbm/harness.hpp"
#include "bifbm/kernel.hpp"
#include "bifbm/localtime.hpp"
#include "bifbm/sampler.hpp"

namespace bifbm::harness {

std::optional<bool> MetricRow::pass() const {
    if (!target || !tolerance) return std::nullopt;
    return std::abs(mean - *target) <= *tolerance;
}

bool RunReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const MetricRow& r) { return r.pass().value_or(true); });
}

const MetricRow& RunReport::find(std::string_view label, std::optional<double> t) const {
    for (const auto& r : rows) {
        if (r.label == label && (!t || std::abs(r.t - *t) <= 1e-12 * std::max(1.0, std::abs(*t)))) return r;
    }
    throw DomainError("RunReport: no row '" + std::string(label) + "'");
}

bool decreasing_ladder(std::span<const double> values, std::span<const double> std_errors) {
    if (values.size() != std_errors.size()) throw DomainError("decreasing_ladder: size mismatch");
    std::size_t inversions = 0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double rise = values[k + 1] - values[k];
        if (rise < 0.0) continue;
        const double se = std::hypot(std_errors[k], std_errors[k + 1]);
        if (rise > se || ++inversions > 1) return false;
    }
    return true;
}

namespace {

constexpr double kRelativeTolerance = 0.05;
constexpr double kStandardErrors = 3.0;

class Builder {
public:
    explicit Builder(RunReport& report) : report_(report) {}

    void add(const EstimateReport& rep, std::optional<double> target = std::nullopt,
             std::optional<double> tolerance = std::nullopt) {
        for (const auto& row : rep.rows) add(rep.label, row, rep.echo.epsilon, target, tolerance);
    }

    void add(const std::string& label, const EstimateRow& row, double epsilon, std::optional<double> target,
             std::optional<double> tolerance) {
        report_.rows.push_back({label, row.t, row.mean, row.std_error, row.n_paths, epsilon, target, tolerance});
    }

    void scalar(const std::string& label, double t, double value, std::optional<double> target = std::nullopt,
                std::optional<double> tolerance = std::nullopt, std::size_t samples = 0) {
        report_.rows.push_back({label, t, value, std::nullopt, samples, 0.0, target, tolerance});
    }

private:
    RunReport& report_;
};

double mean_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Identity residual tolerance: max(5% of `scale`, 3 standard errors).
double identity_tolerance(double scale, double std_error) {
    return std::max(kRelativeTolerance * scale, kStandardErrors * std_error);
}

// Residual rows with target 0, each eval time scaled by its own reference magnitude.
void add_residual(Builder& out, const EstimateReport& residual, const std::vector<double>& scale) {
    for (std::size_t e = 0; e < residual.rows.size(); ++e) {
        const auto& row = residual.rows[e];
        out.add(residual.label, row, residual.echo.epsilon, 0.0, identity_tolerance(scale[e], row.std_error));
    }
}

std::vector<double> mean_abs_rows(const EstimateReport& rep) {
    std::vector<double> out;
    for (const auto& s : rep.samples) out.push_back(mean_abs(s));
    return out;
}

// Per eval time, per path: g(B_t).
EstimateReport terminal_values(const char* label, const PathBatch& batch, const EstimatorConfig& cfg,
                               const std::function<double(double)>& g) {
    const auto idx = cfg.validate(batch);
    std::vector<std::vector<double>> samples(idx.size(), std::vector<double>(batch.n_paths()));
    for (std::size_t e = 0; e < idx.size(); ++e) {
        for (std::size_t p = 0; p < batch.n_paths(); ++p) samples[e][p] = g(batch.path(p)[idx[e]]);
    }
    return EstimateReport::from_samples(label, make_echo(batch, cfg.epsilon(batch.grid())), cfg.eval_times,
                                        std::move(samples));
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    body(out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

LocalTimeField field_for(const ExperimentConfig& cfg, const PathBatch& batch, const RunOptions& options) {
    const auto xs = cfg.space_grid();
    auto field = local_time(batch, xs, cfg.eval_times, cfg.effective_bandwidth(), cfg.kernel);
    if (!options.local_time_csv.empty()) {
        write_file(options.local_time_csv, [&](std::ostream& o) { write_local_time_csv(field, o); });
    }
    return field;
}

void run_lemma_scan(const ExperimentConfig& cfg, Builder& out) {
    const auto report = lemma_scan(cfg.params(), cfg.scan_samples, cfg.seed, cfg.T);
    for (const auto& c : report.checks) {
        if (c.constant) {
            out.scalar(c.name + ".violations", cfg.T, static_cast<double>(c.violations), 0.0, 0.0, c.samples);
        }
        out.scalar(c.name + ".min_ratio", cfg.T, c.min_ratio, std::nullopt, std::nullopt, c.samples);
        out.scalar(c.name + ".max_ratio", cfg.T, c.max_ratio, std::nullopt, std::nullopt, c.samples);
    }
    const double K = cfg.K;
    const bool own = elementary_inequality_check(K, 1.0 / K, 100000);
    const bool reference = elementary_inequality_check(0.5, 2.0, 100000);
    out.scalar("elementary_inequalities.exponents_K", cfg.T, own ? 1.0 : 0.0, 1.0, 0.0, 100000);
    out.scalar("elementary_inequalities.exponents_half_two", cfg.T, reference ? 1.0 : 0.0, 1.0, 0.0, 100000);
}

void run_mollify_ladder(const ExperimentConfig& cfg, const PathBatch& batch, Builder& out) {
    const StepFunction& f = cfg.function.step;
    const auto est = cfg.estimator();
    const auto j_f = quadratic_covariation(f, batch, est);
    std::vector<double> gaps;
    std::vector<std::vector<double>> cov_means(cfg.eval_times.size());
    std::vector<std::vector<double>> cov_ses(cfg.eval_times.size());
    for (auto n : cfg.orders) {
        const std::string tag = "_n" + std::to_string(n);
        const double gap = mollifier_gap(f, n, cfg.T);
        gaps.push_back(gap);
        out.scalar("hnorm_gap" + tag, cfg.T, gap);
        const auto j_n = quadratic_covariation(mollify(f, n), batch, est);
        auto diff = j_n.combined(1.0, j_f, -1.0, "").absolute("covariation_gap" + tag);
        out.add(diff);
        for (std::size_t e = 0; e < diff.rows.size(); ++e) {
            cov_means[e].push_back(diff.rows[e].mean);
            cov_ses[e].push_back(diff.rows[e].std_error);
        }
    }
    const std::vector<double> zeros(gaps.size(), 0.0);
    out.scalar("hnorm_gap_decreasing", cfg.T, decreasing_ladder(gaps, zeros) ? 1.0 : 0.0, 1.0, 0.0);
    for (std::size_t e = 0; e < cfg.eval_times.size(); ++e) {
        out.scalar("covariation_gap_decreasing", cfg.eval_times[e],
                   decreasing_ladder(cov_means[e], cov_ses[e]) ? 1.0 : 0.0, 1.0, 0.0);
    }
}

void run_sampled(const ExperimentConfig& cfg, const RunOptions& options, Builder& out) {
    const ModelParams p = cfg.params();
    const TimeGrid grid = cfg.grid();
    const PathBatch batch = sample_paths(p, grid, cfg.paths, cfg.seed);
    if (!options.paths_csv.empty()) {
        write_file(options.paths_csv, [&](std::ostream& o) { write_paths_csv(batch, o); });
    }
    const auto est = cfg.estimator();
    const auto& spec = cfg.function;
    const bool step = spec.kind == FunctionSpec::Kind::step;

    switch (cfg.experiment) {
        case Experiment::qv: {
            const auto qv = quadratic_variation(batch, est);
            for (const auto& row : qv.rows) {
                const double target = p.qv_constant() * row.t;
                out.add(qv.label, row, qv.echo.epsilon, target, kRelativeTolerance * target);
            }
            break;
        }
        case Experiment::qc: {
            const auto f = spec.function();
            const auto j = step ? quadratic_covariation(spec.step, batch, est) : quadratic_covariation(f, batch, est);
            out.add(j);
            if (f.has_derivative()) {
                const auto ref = smooth_reference(f, batch, cfg.eval_times);
                out.add(ref);
                add_residual(out, j.combined(1.0, ref, -1.0, "covariation_minus_reference"), mean_abs_rows(ref));
            }
            break;
        }
        case Experiment::forward:
            out.add(step ? forward_integral(spec.step, batch, est) : forward_integral(spec.function(), batch, est));
            break;
        case Experiment::backward:
            out.add(step ? backward_integral(spec.step, batch, est) : backward_integral(spec.function(), batch, est));
            break;
        case Experiment::skorohod:
            out.add(step ? skorohod_integral(spec.step, batch, est) : skorohod_integral(spec.function(), batch, est));
            break;
        case Experiment::ito: {
            // `function` names F; the integrand is F'. A step function is taken as the integrand instead.
            const auto F = step ? spec.antiderivative() : spec.function();
            const auto residual = step ? ito_residual(F, spec.step, batch, est, cfg.mode)
                                       : ito_residual(F, spec.derivative(), batch, est, cfg.mode);
            const auto magnitude = terminal_values("abs_F", batch, est, [&](double b) { return std::abs(F(b)); });
            std::vector<double> scale;
            for (const auto& row : magnitude.rows) scale.push_back(row.mean);
            add_residual(out, residual, scale);
            out.add(residual.absolute(residual.label + "_abs"));
            out.add(magnitude);
            break;
        }
        case Experiment::tanaka: {
            const auto field = field_for(cfg, batch, options);
            const auto residual = tanaka_residual(batch, est, field, cfg.x);
            const double x = cfg.x;
            const auto magnitude = terminal_values("abs_shift", batch, est, [x](double b) { return std::abs(b - x); });
            std::vector<double> scale;
            for (const auto& row : magnitude.rows) scale.push_back(row.mean);
            add_residual(out, residual, scale);
            out.add(residual.absolute("tanaka_residual_abs"));
            out.add(magnitude);
            const std::size_t k = field.space_index(x);
            std::vector<std::vector<double>> lt(cfg.eval_times.size(), std::vector<double>(batch.n_paths()));
            for (std::size_t e = 0; e < lt.size(); ++e) {
                const std::size_t fe = field.time_index(cfg.eval_times[e]);
                for (std::size_t q = 0; q < batch.n_paths(); ++q) lt[e][q] = field.at(q, k, fe);
            }
            out.add(EstimateReport::from_samples("local_time", make_echo(batch, 0.0), cfg.eval_times, std::move(lt)));
            break;
        }
        case Experiment::bouleau_yor: {
            const auto field = field_for(cfg, batch, options);
            const auto j = quadratic_covariation(spec.step, batch, est);
            std::vector<std::vector<double>> lt;
            for (double t : cfg.eval_times) lt.push_back(integral_wrt_localtime(spec.step, field, t));
            const auto lt_rep =
                EstimateReport::from_samples("local_time_integral", make_echo(batch, 0.0), cfg.eval_times, lt);
            out.add(j);
            out.add(lt_rep);
            add_residual(out, bouleau_yor_residual(spec.step, batch, est, field), mean_abs_rows(j));
            add_residual(out, local_time_sum_residual(spec.step, batch, est, field), mean_abs_rows(lt_rep));
            break;
        }
        case Experiment::occupation: {
            const auto field = field_for(cfg, batch, options);
            const auto psi = spec.function();
            const bool flat = spec.kind == FunctionSpec::Kind::constant;
            for (double t : cfg.eval_times) {
                auto unit = occupation_check(batch, field, ScalarFunction::constant(1.0), t);
                unit.label = "occupation_gap_unit";
                out.add(unit, 0.0, 0.02);
                out.add(occupation_check(batch, field, psi, t), 0.0, flat ? 0.02 : 0.05);
            }
            break;
        }
        case Experiment::mollify_ladder: run_mollify_ladder(cfg, batch, out); break;
        case Experiment::lemma_scan:
        case Experiment::hnorm: break;
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    cfg.validate();
    RunReport report{cfg, {}, 0.0, utc_timestamp()};
    Builder out(report);
    const auto start = std::chrono::steady_clock::now();
    const std::string context = "experiment " + std::string(to_string(cfg.experiment)) + ": ";
    try {
        switch (cfg.experiment) {
            case Experiment::lemma_scan: run_lemma_scan(cfg, out); break;
            case Experiment::hnorm: out.scalar("hnorm", cfg.T, hnorm(cfg.function.step, cfg.T)); break;
            default: run_sampled(cfg, options, out); break;
        }
    } catch (const FactorizationError& e) {
        throw FactorizationError(context + e.what(), e.pivot());
    } catch (const DomainError& e) {
        throw DomainError(context + e.what());
    } catch (const IoError& e) {
        throw IoError(context + e.what());
    }
    report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace bifbm::harness
