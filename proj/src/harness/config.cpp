#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include "bifbm/errors.hpp"
#include "bifbm/harness.hpp"

namespace bifbm::harness {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
}

// Exact round-trip rendering for config text.
std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_floating_point_v<T>) out += exact(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

bool on_grid(double t, double dt) {
    const double q = t / dt;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::round(q));
}

StepFunction default_step(Experiment e) {
    if (e == Experiment::bouleau_yor) return StepFunction::indicator(-1.0, 1.0);
    return StepFunction::indicator(0.0, 1.0);
}

FunctionSpec default_function(Experiment e) {
    FunctionSpec spec;
    switch (e) {
        case Experiment::qc:
        case Experiment::ito: spec.kind = FunctionSpec::Kind::square; break;
        case Experiment::occupation: spec.kind = FunctionSpec::Kind::gaussian_bump; break;
        case Experiment::bouleau_yor:
        case Experiment::hnorm:
        case Experiment::mollify_ladder:
            spec.kind = FunctionSpec::Kind::step;
            spec.step = default_step(e);
            break;
        default: spec.kind = FunctionSpec::Kind::identity; break;
    }
    return spec;
}

bool needs_step(Experiment e) {
    return e == Experiment::bouleau_yor || e == Experiment::hnorm || e == Experiment::mollify_ladder;
}

class Parser {
public:
    Parser(std::string_view text, const std::map<std::string, std::string>& overrides) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
            ++line_no;
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            const std::string line = trim(raw.substr(0, raw.find('#')));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value', got '" + line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("", line_no, "empty key");
            if (entries_.count(key)) {
                throw ConfigError(key, line_no, "duplicate key (first set on line " +
                                                    std::to_string(entries_[key].line) + ")");
            }
            entries_[key] = {value, line_no};
        }
        for (const auto& [key, value] : overrides) entries_[key] = {value, 0};
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    std::size_t line(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }
    const std::string& raw(const std::string& key) {
        used_.insert(key);
        return entries_.at(key).value;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        throw ConfigError(key, line(key), message);
    }

    double real(const std::string& key, const std::string& text) const {
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            const double num = plain_real(key, trim(text.substr(0, slash)));
            const double den = plain_real(key, trim(text.substr(slash + 1)));
            if (den == 0.0) fail(key, "zero denominator in '" + text + "'");
            return num / den;
        }
        return plain_real(key, text);
    }
    double real(const std::string& key) { return real(key, raw(key)); }

    std::uint64_t count(const std::string& key, const std::string& text) const {
        if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
            fail(key, "expected a non-negative integer, got '" + text + "'");
        }
        errno = 0;
        const auto v = std::strtoull(text.c_str(), nullptr, 10);
        if (errno == ERANGE) fail(key, "integer out of range: '" + text + "'");
        return v;
    }
    std::uint64_t count(const std::string& key) { return count(key, raw(key)); }

    std::vector<double> reals(const std::string& key) {
        std::vector<double> out;
        for (const auto& item : split_list(raw(key))) {
            if (item.empty()) fail(key, "empty list entry");
            out.push_back(real(key, item));
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key) {
        std::vector<std::size_t> out;
        for (const auto& item : split_list(raw(key))) out.push_back(count(key, item));
        return out;
    }

    void reject_unused() const {
        for (const auto& [key, entry] : entries_) {
            if (!used_.count(key)) throw ConfigError(key, entry.line, "unknown key");
        }
    }

private:
    double plain_real(const std::string& key, const std::string& text) const {
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
            fail(key, "expected a finite real number, got '" + text + "'");
        }
        return v;
    }

    struct Entry {
        std::string value;
        std::size_t line = 0;
    };
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

}  // namespace

ModelParams ExperimentConfig::params() const {
    return requires_critical(experiment) ? ModelParams(H, K) : ModelParams::unconstrained(H, K);
}

EstimatorConfig ExperimentConfig::estimator() const { return {epsilon_steps, eval_times}; }

TimeGrid ExperimentConfig::grid() const { return TimeGrid(T, steps, epsilon_steps); }

std::vector<double> ExperimentConfig::space_grid() const {
    const double lo = space_min.value_or(-4.0 * std::sqrt(T));
    const double hi = space_max.value_or(4.0 * std::sqrt(T));
    std::vector<double> x(space_nodes);
    for (std::size_t k = 0; k < space_nodes; ++k) {
        x[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(space_nodes - 1);
    }
    // Snap nodes that are zero up to round-off so x = 0 is addressable.
    for (double& v : x) {
        if (std::abs(v) <= 1e-12 * (hi - lo)) v = 0.0;
    }
    return x;
}

double ExperimentConfig::effective_bandwidth() const {
    return bandwidth > 0.0 ? bandwidth : default_bandwidth(TimeGrid(T, steps), space_grid());
}

void ExperimentConfig::validate() const {
    auto fail = [](const char* key, const std::string& message) { throw ConfigError(key, 0, message); };
    if (!(H > 0.0 && H < 1.0)) fail("H", "H must lie in (0, 1), got " + exact(H));
    if (!(K > 0.0 && K <= 1.0)) fail("K", "K must lie in (0, 1], got " + exact(K));
    if (requires_critical(experiment) && std::abs(2.0 * H * K - 1.0) > kCriticalTolerance) {
        fail("K", "experiment " + std::string(to_string(experiment)) + " requires 2HK = 1, got 2HK = " +
                      exact(2.0 * H * K));
    }
    if (!(T > 0.0)) fail("T", "T must be > 0");
    if (steps < 1) fail("steps", "steps must be >= 1");
    if (epsilon_steps < 1) fail("epsilon_steps", "epsilon must be a positive multiple of dt");
    if (paths < 1) fail("paths", "paths must be >= 1");
    if (eval_times.empty()) fail("eval_times", "at least one eval time is required");
    const double dt = T / static_cast<double>(steps);
    for (double t : eval_times) {
        if (!(t > 0.0) || t > T * (1.0 + 1e-12)) fail("eval_times", "eval time " + exact(t) + " is outside (0, T]");
        if (!on_grid(t, dt)) fail("eval_times", "eval time " + exact(t) + " is not a multiple of dt = " + exact(dt));
    }
    if (space_nodes < 2) fail("space_nodes", "space_nodes must be >= 2");
    const auto xs = space_grid();
    if (!(xs.front() < xs.back())) fail("space_max", "space_max must exceed space_min");
    if (bandwidth < 0.0) fail("bandwidth", "bandwidth must be > 0 (or 0 for the default)");
    if (orders.empty()) fail("orders", "at least one mollifier order is required");
    for (auto n : orders) {
        if (n < 1) fail("orders", "mollifier orders must be >= 1");
    }
    if (scan_samples < 1) fail("scan_samples", "scan_samples must be >= 1");
    if (needs_step(experiment) && function.kind != FunctionSpec::Kind::step) {
        fail("function", "experiment " + std::string(to_string(experiment)) + " needs a step function");
    }
    if (function.kind == FunctionSpec::Kind::step && function.step.empty()) {
        fail("breakpoints", "step function needs breakpoints and levels");
    }
    if (experiment == Experiment::tanaka) {
        const double tol = 1e-9 * (xs[1] - xs[0]);
        bool found = false;
        for (double v : xs) found = found || std::abs(v - x) <= tol;
        if (!found) fail("x", "x = " + exact(x) + " is not a node of the space grid");
    }
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    out << "experiment = " << to_string(experiment) << '\n';
    out << "H = " << exact(H) << '\n';
    out << "K = " << exact(K) << '\n';
    out << "T = " << exact(T) << '\n';
    out << "steps = " << steps << '\n';
    out << "epsilon_steps = " << epsilon_steps << '\n';
    out << "paths = " << paths << '\n';
    out << "seed = " << seed << '\n';
    out << "eval_times = " << join(eval_times) << '\n';
    out << "function = " << function.name() << '\n';
    if (function.kind == FunctionSpec::Kind::step) {
        const auto bp = function.step.breakpoints();
        const auto lv = function.step.levels();
        out << "breakpoints = " << join(std::vector<double>(bp.begin(), bp.end())) << '\n';
        out << "levels = " << join(std::vector<double>(lv.begin(), lv.end())) << '\n';
    }
    if (space_min) out << "space_min = " << exact(*space_min) << '\n';
    if (space_max) out << "space_max = " << exact(*space_max) << '\n';
    out << "space_nodes = " << space_nodes << '\n';
    if (bandwidth > 0.0) out << "bandwidth = " << exact(bandwidth) << '\n';
    out << "kernel = " << (kernel == LocalTimeKernel::boxcar ? "boxcar" : "gaussian") << '\n';
    out << "x = " << exact(x) << '\n';
    out << "orders = " << join(orders) << '\n';
    out << "mode = " << (mode == ItoMode::forward ? "forward" : "skorohod") << '\n';
    out << "scan_samples = " << scan_samples << '\n';
    if (!output.empty()) out << "output = " << output << '\n';
    out << "format = " << (format == OutputFormat::csv ? "csv" : "json") << '\n';
    return out.str();
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return experiment == o.experiment && H == o.H && K == o.K && T == o.T && steps == o.steps &&
           epsilon_steps == o.epsilon_steps && paths == o.paths && seed == o.seed && eval_times == o.eval_times &&
           function == o.function && space_min == o.space_min && space_max == o.space_max &&
           space_nodes == o.space_nodes && bandwidth == o.bandwidth && kernel == o.kernel && x == o.x &&
           orders == o.orders && mode == o.mode && scan_samples == o.scan_samples && output == o.output &&
           format == o.format;
}

ExperimentConfig parse_config(std::string_view text) { return parse_config(text, {}); }

ExperimentConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides) {
    Parser p(text, overrides);
    ExperimentConfig cfg;

    if (!p.has("experiment")) throw ConfigError("experiment", 0, "missing required key");
    {
        const auto& name = p.raw("experiment");
        const auto e = parse_experiment(name);
        if (!e) {
            p.fail("experiment", "unknown experiment '" + name +
                                     "' (qv, qc, forward, backward, skorohod, ito, tanaka, bouleau-yor, "
                                     "occupation, lemma-scan, hnorm, mollify-ladder)");
        }
        cfg.experiment = *e;
    }

    if (p.has("H")) cfg.H = p.real("H");
    if (p.has("K")) cfg.K = p.real("K");
    else if (p.has("H")) cfg.K = 1.0 / (2.0 * cfg.H);
    if (p.has("T")) cfg.T = p.real("T");
    if (p.has("steps")) cfg.steps = p.count("steps");
    if (p.has("paths")) cfg.paths = p.count("paths");
    if (p.has("seed")) cfg.seed = p.count("seed");
    if (p.has("eval_times")) cfg.eval_times = p.reals("eval_times");
    if (p.has("space_min")) cfg.space_min = p.real("space_min");
    if (p.has("space_max")) cfg.space_max = p.real("space_max");
    if (p.has("space_nodes")) cfg.space_nodes = p.count("space_nodes");
    if (p.has("bandwidth")) {
        const auto& v = p.raw("bandwidth");
        cfg.bandwidth = v == "default" ? 0.0 : p.real("bandwidth", v);
        if (!(cfg.bandwidth > 0.0) && v != "default") p.fail("bandwidth", "bandwidth must be > 0");
    }
    if (p.has("x")) cfg.x = p.real("x");
    if (p.has("orders")) cfg.orders = p.counts("orders");
    if (p.has("scan_samples")) cfg.scan_samples = p.count("scan_samples");
    if (p.has("output")) cfg.output = p.raw("output");
    if (p.has("kernel")) {
        const auto& v = p.raw("kernel");
        if (v == "boxcar") cfg.kernel = LocalTimeKernel::boxcar;
        else if (v == "gaussian") cfg.kernel = LocalTimeKernel::gaussian;
        else p.fail("kernel", "expected boxcar or gaussian, got '" + v + "'");
    }
    if (p.has("mode")) {
        const auto& v = p.raw("mode");
        if (v == "forward") cfg.mode = ItoMode::forward;
        else if (v == "skorohod") cfg.mode = ItoMode::skorohod;
        else p.fail("mode", "expected forward or skorohod, got '" + v + "'");
    }
    if (p.has("format")) {
        const auto& v = p.raw("format");
        if (v == "csv") cfg.format = OutputFormat::csv;
        else if (v == "json") cfg.format = OutputFormat::json;
        else p.fail("format", "expected csv or json, got '" + v + "'");
    }

    if (p.has("epsilon_steps") && p.has("epsilon")) p.fail("epsilon", "give either epsilon or epsilon_steps, not both");
    if (p.has("epsilon_steps")) cfg.epsilon_steps = p.count("epsilon_steps");
    if (p.has("epsilon")) {
        const double eps = p.real("epsilon");
        if (!(cfg.T > 0.0) || cfg.steps < 1) p.fail("epsilon", "epsilon needs a valid T and steps");
        const double dt = cfg.T / static_cast<double>(cfg.steps);
        if (!(eps > 0.0) || !on_grid(eps, dt)) {
            p.fail("epsilon", "epsilon = " + exact(eps) + " is not a positive multiple of dt = " + exact(dt));
        }
        cfg.epsilon_steps = static_cast<std::size_t>(std::llround(eps / dt));
    }

    // Function: named catalog entry, or a step function from breakpoints/levels.
    const bool has_step_keys = p.has("breakpoints") || p.has("levels");
    if (p.has("function")) {
        try {
            cfg.function = parse_function(p.raw("function"));
        } catch (const DomainError& e) {
            p.fail("function", e.what());
        }
    } else if (has_step_keys) {
        cfg.function.kind = FunctionSpec::Kind::step;
    } else {
        cfg.function = default_function(cfg.experiment);
    }
    if (cfg.function.kind == FunctionSpec::Kind::step) {
        if (has_step_keys) {
            if (!p.has("breakpoints") || !p.has("levels")) {
                p.fail(p.has("breakpoints") ? "levels" : "breakpoints", "step functions need both breakpoints and levels");
            }
            const auto bp = p.reals("breakpoints");
            const auto lv = p.reals("levels");
            try {
                cfg.function.step = StepFunction(bp, lv);
            } catch (const DomainError& e) {
                p.fail("breakpoints", e.what());
            }
        } else {
            cfg.function.step = default_step(cfg.experiment);
        }
    } else if (has_step_keys) {
        p.fail(p.has("breakpoints") ? "breakpoints" : "levels", "only used with function = step");
    }

    p.reject_unused();
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const std::string prefix = "config error [" + e.key() + "]: ";
        std::string message = e.what();
        if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
        throw ConfigError(e.key(), p.line(e.key()), message);
    }
    return cfg;
}

}  // namespace bifbm::harness
