#include "bifbm/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "bifbm/errors.hpp"
#include "bifbm/kernel.hpp"
#include "bifbm/parallel.hpp"

namespace bifbm {

namespace {

constexpr double kGaussianCutoff = 8.0;

std::string num(double v) { return std::to_string(v); }

// Trapezoid weights of an increasing grid.
std::vector<double> trapezoid_weights(std::span<const double> x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double half = 0.5 * (x[k + 1] - x[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    return w;
}

std::vector<std::size_t> sorted_order(std::span<const std::size_t> idx) {
    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
    return order;
}

}  // namespace

LocalTimeField::LocalTimeField(std::vector<double> space_grid, std::vector<double> eval_times, double bandwidth,
                               LocalTimeKernel kernel, std::size_t n_paths, std::vector<double> values)
    : space_(std::move(space_grid)),
      times_(std::move(eval_times)),
      bandwidth_(bandwidth),
      kernel_(kernel),
      n_paths_(n_paths),
      values_(std::move(values)) {
    if (!(bandwidth_ > 0.0)) throw DomainError("LocalTimeField: bandwidth must be > 0");
    if (space_.size() < 2) throw DomainError("LocalTimeField: space grid needs at least 2 nodes");
    for (std::size_t k = 0; k + 1 < space_.size(); ++k) {
        if (!(space_[k + 1] > space_[k])) throw DomainError("LocalTimeField: space grid must be strictly increasing");
    }
    if (times_.empty()) throw DomainError("LocalTimeField: at least one eval time is required");
    if (values_.size() != n_paths_ * times_.size() * space_.size()) {
        throw DomainError("LocalTimeField: value table has the wrong size");
    }
}

std::size_t LocalTimeField::time_index(double t) const {
    for (std::size_t e = 0; e < times_.size(); ++e) {
        if (std::abs(times_[e] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return e;
    }
    throw DomainError("LocalTimeField: t = " + num(t) + " is not one of the field's eval times");
}

std::size_t LocalTimeField::space_index(double x) const {
    const auto it = std::lower_bound(space_.begin(), space_.end(), x);
    const double tol = 1e-9 * (space_[1] - space_[0]);
    for (auto cand : {it, it == space_.begin() ? it : it - 1}) {
        if (cand != space_.end() && std::abs(*cand - x) <= tol) return static_cast<std::size_t>(cand - space_.begin());
    }
    throw DomainError("LocalTimeField: x = " + num(x) + " is not a node of the space grid");
}

double LocalTimeField::interpolate(std::size_t path, double x, std::size_t e) const noexcept {
    if (x < space_.front() || x > space_.back()) return 0.0;
    const auto row = slice(path, e);
    auto it = std::upper_bound(space_.begin(), space_.end(), x);
    if (it == space_.end()) return row.back();
    const std::size_t k = static_cast<std::size_t>(it - space_.begin());
    const double w = (x - space_[k - 1]) / (space_[k] - space_[k - 1]);
    return (1.0 - w) * row[k - 1] + w * row[k];
}

double LocalTimeField::mass(std::size_t path, std::size_t e) const noexcept {
    const auto row = slice(path, e);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < space_.size(); ++k) total += 0.5 * (row[k] + row[k + 1]) * (space_[k + 1] - space_[k]);
    return total;
}

std::vector<double> default_space_grid(double T) {
    if (!(T > 0.0)) throw DomainError("default_space_grid: T must be > 0");
    constexpr std::size_t nodes = 201;
    const double half = 4.0 * std::sqrt(T);
    std::vector<double> x(nodes);
    for (std::size_t k = 0; k < nodes; ++k) x[k] = -half + 2.0 * half * static_cast<double>(k) / (nodes - 1);
    x[nodes / 2] = 0.0;
    return x;
}

double default_bandwidth(const TimeGrid& grid, std::span<const double> space_grid) {
    if (space_grid.size() < 2) throw DomainError("default_bandwidth: space grid needs at least two nodes");
    const double half = 0.5 * (space_grid.back() - space_grid.front()) / static_cast<double>(space_grid.size() - 1);
    if (!(half > 0.0)) throw DomainError("default_bandwidth: space grid must be increasing");
    return half * std::max(1.0, std::round(std::sqrt(grid.dt()) / half));
}

LocalTimeField local_time(const PathBatch& batch, std::span<const double> space_grid,
                          std::span<const double> eval_times, double bandwidth, LocalTimeKernel kernel) {
    if (!(bandwidth > 0.0)) throw DomainError("local_time: bandwidth must be > 0, got " + num(bandwidth));
    if (eval_times.empty()) throw DomainError("local_time: at least one eval time is required");
    const TimeGrid& grid = batch.grid();
    std::vector<std::size_t> idx;
    for (double t : eval_times) {
        if (t < 0.0) throw DomainError("local_time: eval times must be >= 0");
        idx.push_back(grid.index_of(t));
    }
    const auto order = sorted_order(idx);
    const std::vector<double> x(space_grid.begin(), space_grid.end());
    const std::size_t nx = x.size();
    const std::size_t ne = idx.size();
    if (nx < 2) throw DomainError("local_time: space grid needs at least 2 nodes");

    const double dt = grid.dt();
    std::vector<double> values(batch.n_paths() * ne * nx, 0.0);
    parallel_for(batch.n_paths(), [&](std::size_t p) {
        const auto b = batch.path(p);
        std::vector<double> acc(nx, 0.0);
        std::size_t i = 0;
        for (std::size_t e : order) {
            for (; i < idx[e]; ++i) {
                const double v = b[i];
                if (kernel == LocalTimeKernel::boxcar) {
                    auto lo = std::upper_bound(x.begin(), x.end(), v - bandwidth);
                    auto hi = std::lower_bound(lo, x.end(), v + bandwidth);
                    for (auto it = lo; it != hi; ++it) {
                        if (std::abs(v - *it) < bandwidth) acc[static_cast<std::size_t>(it - x.begin())] += 1.0;
                    }
                } else {
                    const double reach = kGaussianCutoff * bandwidth;
                    auto lo = std::lower_bound(x.begin(), x.end(), v - reach);
                    auto hi = std::upper_bound(lo, x.end(), v + reach);
                    for (auto it = lo; it != hi; ++it) {
                        acc[static_cast<std::size_t>(it - x.begin())] += heat_kernel(bandwidth * bandwidth, v - *it);
                    }
                }
            }
            const double scale = kernel == LocalTimeKernel::boxcar ? dt / (2.0 * bandwidth) : dt;
            double* out = values.data() + (p * ne + e) * nx;
            for (std::size_t k = 0; k < nx; ++k) out[k] = scale * acc[k];
        }
    });
    return LocalTimeField(x, std::vector<double>(eval_times.begin(), eval_times.end()), bandwidth, kernel,
                          batch.n_paths(), std::move(values));
}

LocalTimeField local_time(const PathBatch& batch, std::span<const double> eval_times) {
    const auto x = default_space_grid(batch.grid().horizon());
    return local_time(batch, x, eval_times, default_bandwidth(batch.grid(), x));
}

void write_local_time_csv(const LocalTimeField& field, std::ostream& out) {
    out << "path_id,x,t,L\n";
    char line[128];
    const auto x = field.space_grid();
    const auto t = field.eval_times();
    for (std::size_t p = 0; p < field.n_paths(); ++p) {
        for (std::size_t e = 0; e < t.size(); ++e) {
            for (std::size_t k = 0; k < x.size(); ++k) {
                std::snprintf(line, sizeof line, "%zu,%.12g,%.12g,%.17g\n", p, x[k], t[e], field.at(p, k, e));
                out << line;
            }
        }
    }
}

EstimateReport occupation_check(const PathBatch& batch, const LocalTimeField& field, const ScalarFunction& psi,
                                double t) {
    if (field.n_paths() != batch.n_paths()) throw DomainError("occupation_check: field and batch differ in path count");
    const std::size_t e = field.time_index(t);
    const std::size_t steps = batch.grid().index_of(t);
    const double dt = batch.grid().dt();
    const auto x = field.space_grid();
    const auto w = trapezoid_weights(x);
    std::vector<double> psi_x(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) psi_x[k] = psi(x[k]);

    std::vector<std::vector<double>> samples(1, std::vector<double>(batch.n_paths()));
    parallel_for(batch.n_paths(), [&](std::size_t p) {
        const auto b = batch.path(p);
        double time_side = 0.0;
        for (std::size_t i = 0; i < steps; ++i) time_side += psi(b[i]);
        time_side *= dt;
        const auto row = field.slice(p, e);
        double space_side = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) space_side += psi_x[k] * row[k] * w[k];
        samples[0][p] = space_side == time_side ? 0.0 : std::abs(space_side - time_side) / std::abs(time_side);
    });
    const double times[] = {t};
    return EstimateReport::from_samples("occupation_gap", make_echo(batch, 0.0), times, std::move(samples));
}

EstimateReport occupation_check(const PathBatch& batch, const ScalarFunction& psi, double t) {
    const double times[] = {t};
    return occupation_check(batch, local_time(batch, times), psi, t);
}

std::vector<double> integral_wrt_localtime(const StepFunction& f, const LocalTimeField& field, double t) {
    const std::size_t e = field.time_index(t);
    std::vector<double> out(field.n_paths(), 0.0);
    if (f.empty()) return out;
    const auto a = f.breakpoints();
    const auto c = f.levels();
    for (std::size_t p = 0; p < field.n_paths(); ++p) {
        double total = 0.0;
        double left = field.interpolate(p, a[0], e);
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double right = field.interpolate(p, a[j + 1], e);
            total += c[j] * (right - left);
            left = right;
        }
        out[p] = total;
    }
    return out;
}

namespace {

// base + coeff * (local-time sum), per path and eval time.
EstimateReport combine_with_localtime(const char* label, const EstimateReport& base, double coeff_base,
                                      const StepFunction& f, const LocalTimeField& field, double coeff_lt,
                                      const EstimatorConfig& cfg) {
    std::vector<std::vector<double>> samples(cfg.eval_times.size());
    for (std::size_t e = 0; e < cfg.eval_times.size(); ++e) {
        const auto lt = integral_wrt_localtime(f, field, cfg.eval_times[e]);
        samples[e].resize(lt.size());
        for (std::size_t p = 0; p < lt.size(); ++p) {
            samples[e][p] = coeff_base * base.samples[e][p] + coeff_lt * lt[p];
        }
    }
    return EstimateReport::from_samples(label, base.echo, cfg.eval_times, std::move(samples));
}

void require_same_batch(const PathBatch& batch, const LocalTimeField& field, const char* what) {
    if (field.n_paths() != batch.n_paths()) {
        throw DomainError(std::string(what) + ": field and batch differ in path count");
    }
}

}  // namespace

EstimateReport bouleau_yor_residual(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg,
                                    const LocalTimeField& field) {
    batch.params().require_critical("bouleau_yor_residual");
    require_same_batch(batch, field, "bouleau_yor_residual");
    const auto j = quadratic_covariation(f, batch, cfg);
    return combine_with_localtime("bouleau_yor_residual", j, 1.0, f, field, batch.params().qv_constant(), cfg);
}

EstimateReport local_time_sum_residual(const StepFunction& f, const PathBatch& batch, const EstimatorConfig& cfg,
                                       const LocalTimeField& field) {
    batch.params().require_critical("local_time_sum_residual");
    require_same_batch(batch, field, "local_time_sum_residual");
    const auto j = quadratic_covariation(f, batch, cfg);
    return combine_with_localtime("local_time_sum_residual", j, std::exp2(batch.params().K() - 1.0), f, field, 1.0,
                                  cfg);
}

EstimateReport tanaka_residual(const PathBatch& batch, const EstimatorConfig& cfg, const LocalTimeField& field,
                               double x) {
    batch.params().require_critical("tanaka_residual");
    require_same_batch(batch, field, "tanaka_residual");
    const std::size_t k = field.space_index(x);
    const auto sign = ScalarFunction::rough([x](double y) { return y > x ? 1.0 : -1.0; }, Smoothness::step);
    const auto fwd = forward_integral(sign, batch, cfg);
    const auto idx = cfg.validate(batch);
    const double lt_coeff = batch.params().qv_constant();

    std::vector<std::vector<double>> samples(idx.size(), std::vector<double>(batch.n_paths()));
    for (std::size_t e = 0; e < idx.size(); ++e) {
        const std::size_t fe = field.time_index(cfg.eval_times[e]);
        for (std::size_t p = 0; p < batch.n_paths(); ++p) {
            const double bt = batch.path(p)[idx[e]];
            samples[e][p] = std::abs(bt - x) - std::abs(x) - fwd.samples[e][p] - lt_coeff * field.at(p, k, fe);
        }
    }
    return EstimateReport::from_samples("tanaka_residual", fwd.echo, cfg.eval_times, std::move(samples));
}

}  // namespace bifbm
