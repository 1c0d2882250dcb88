#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bifbm/estimators.hpp"
#include "bifbm/functions.hpp"
#include "bifbm/localtime.hpp"
#include "bifbm/params.hpp"

namespace bifbm::harness {

enum class Experiment {
    qv,
    qc,
    forward,
    backward,
    skorohod,
    ito,
    tanaka,
    bouleau_yor,
    occupation,
    lemma_scan,
    hnorm,
    mollify_ladder,
};

std::string_view to_string(Experiment e) noexcept;
std::optional<Experiment> parse_experiment(std::string_view name) noexcept;
// Every experiment except forward, backward and hnorm needs 2HK = 1.
bool requires_critical(Experiment e) noexcept;

// ---------------------------------------------------------------- catalog

// Named function from the built-in catalog, or a step function.
//   identity        x
//   square          x^2
//   abs-shift(a)    |x - a|          (derivative sign(x - a), sign(0) = -1)
//   gaussian-bump   exp(-x^2 / 2)
//   constant(c)     c
//   step            sum_j levels[j] 1_{(a_j, a_{j+1}]} from `breakpoints` / `levels`
struct FunctionSpec {
    enum class Kind { identity, square, abs_shift, gaussian_bump, constant, step };

    Kind kind = Kind::identity;
    double parameter = 0.0;  // a of abs-shift, c of constant
    StepFunction step;       // only for Kind::step

    // Catalog name as written in a config (`step` for step functions).
    std::string name() const;
    // The function itself; derivatives attached where the catalog knows them.
    ScalarFunction function() const;
    // Its derivative (a step function for abs-shift); throws DomainError for `step`.
    ScalarFunction derivative() const;
    // For ito: F with F' = function(). Step functions integrate to a piecewise-linear F.
    ScalarFunction antiderivative() const;

    bool operator==(const FunctionSpec& other) const;
};

// Parses a catalog name such as "square" or "abs-shift(0.5)". "step" needs the
// breakpoints and levels supplied separately.
FunctionSpec parse_function(std::string_view text);

// ---------------------------------------------------------------- config

enum class OutputFormat { csv, json };

struct ExperimentConfig {
    Experiment experiment = Experiment::qv;
    double H = 0.75;
    double K = 2.0 / 3.0;
    double T = 1.0;
    std::size_t steps = 2048;
    std::size_t epsilon_steps = 16;
    std::size_t paths = 500;
    std::uint64_t seed = 12345;
    std::vector<double> eval_times{1.0};
    FunctionSpec function;
    std::optional<double> space_min;  // default -4 sqrt(T)
    std::optional<double> space_max;  // default +4 sqrt(T)
    std::size_t space_nodes = 201;
    double bandwidth = 0.0;  // 0: default_bandwidth(grid(), space_grid())
    LocalTimeKernel kernel = LocalTimeKernel::boxcar;
    double x = 0.0;
    std::vector<std::size_t> orders{4, 16, 64};
    ItoMode mode = ItoMode::forward;
    std::size_t scan_samples = 10000;
    std::string output;
    OutputFormat format = OutputFormat::csv;

    ModelParams params() const;
    EstimatorConfig estimator() const;
    TimeGrid grid() const;
    std::vector<double> space_grid() const;
    double effective_bandwidth() const;

    // Canonical `key = value` text; parse_config(to_text()) reproduces *this.
    std::string to_text() const;

    // Cross-field checks (grid, epsilon, eval times, 2HK = 1 where required).
    // Throws ConfigError naming the field.
    void validate() const;

    bool operator==(const ExperimentConfig& other) const;
};

// `key = value` lines, `#` starts a comment. K (and H) may be written as a
// fraction "p/q". `epsilon` may be given in time units instead of
// `epsilon_steps`; it must then be a multiple of dt. Unset keys take the
// experiment's defaults. Throws ConfigError with the line and key.
ExperimentConfig parse_config(std::string_view text);
// Same, with `overrides` replacing (or adding) keys before validation; errors
// on an override report line 0.
ExperimentConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides);

// ---------------------------------------------------------------- run

struct MetricRow {
    std::string label;
    double t = 0.0;
    double mean = 0.0;
    std::optional<double> std_error;
    std::size_t n_paths = 0;
    double epsilon = 0.0;
    std::optional<double> target;
    std::optional<double> tolerance;  // pass iff |mean - target| <= tolerance

    std::optional<bool> pass() const;
};

struct RunReport {
    ExperimentConfig config;
    std::vector<MetricRow> rows;
    double wall_clock_seconds = 0.0;
    std::string timestamp;  // ISO 8601 UTC

    bool all_pass() const;
    const MetricRow& find(std::string_view label, std::optional<double> t = std::nullopt) const;
};

struct RunOptions {
    std::string paths_csv;       // dump the sampled batch when non-empty
    std::string local_time_csv;  // dump the local-time field (local-time experiments)
};

// True when `values` decrease along the ladder with at most one inversion, and
// that inversion no larger than the combined standard error of the two rungs.
bool decreasing_ladder(std::span<const double> values, std::span<const double> std_errors);

// Samples, estimates and attaches targets for one experiment. Module errors
// are rethrown with the experiment name prefixed (same exception type).
RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

// ---------------------------------------------------------------- report

inline constexpr std::string_view kCsvHeader = "label,t,mean,stderr,n_paths,epsilon,H,K,seed,target,pass";

std::string emit_csv(const RunReport& report);
// JSON mirror of the CSV rows plus the config echo; wall clock and timestamp
// only when `with_timestamp`.
std::string emit_json(const RunReport& report, bool with_timestamp);
std::string emit_report(const RunReport& report, OutputFormat format, bool with_timestamp = false);
// Writes the bytes to `path`; throws IoError when it cannot.
void write_report(const std::string& bytes, const std::string& path);

// "%.12g" rendering used by every report field.
std::string format_number(double v);

}  // namespace bifbm::harness
