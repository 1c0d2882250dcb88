#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <utility>

#include "bifbm/errors.hpp"
#include "bifbm/harness.hpp"

namespace bifbm::harness {

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 12> kExperiments{{
    {Experiment::qv, "qv"},
    {Experiment::qc, "qc"},
    {Experiment::forward, "forward"},
    {Experiment::backward, "backward"},
    {Experiment::skorohod, "skorohod"},
    {Experiment::ito, "ito"},
    {Experiment::tanaka, "tanaka"},
    {Experiment::bouleau_yor, "bouleau-yor"},
    {Experiment::occupation, "occupation"},
    {Experiment::lemma_scan, "lemma-scan"},
    {Experiment::hnorm, "hnorm"},
    {Experiment::mollify_ladder, "mollify-ladder"},
}};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double parse_argument(std::string_view name, std::string_view text) {
    const std::string s = trim(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw DomainError("function " + std::string(name) + ": argument '" + s + "' is not a finite number");
    }
    return v;
}

double sign_above(double y, double a) { return y > a ? 1.0 : -1.0; }

}  // namespace

std::string_view to_string(Experiment e) noexcept {
    for (const auto& [k, name] : kExperiments) {
        if (k == e) return name;
    }
    return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) noexcept {
    for (const auto& [k, n] : kExperiments) {
        if (n == name) return k;
    }
    return std::nullopt;
}

bool requires_critical(Experiment e) noexcept {
    return e != Experiment::forward && e != Experiment::backward && e != Experiment::hnorm;
}

std::string FunctionSpec::name() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::square: return "square";
        case Kind::abs_shift: return "abs-shift(" + format_number(parameter) + ")";
        case Kind::gaussian_bump: return "gaussian-bump";
        case Kind::constant: return "constant(" + format_number(parameter) + ")";
        case Kind::step: return "step";
    }
    return "unknown";
}

ScalarFunction FunctionSpec::function() const {
    const double a = parameter;
    switch (kind) {
        case Kind::identity:
            return ScalarFunction::c2([](double x) { return x; }, [](double) { return 1.0; },
                                      [](double) { return 0.0; }, Smoothness::smooth);
        case Kind::square:
            return ScalarFunction::c2([](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                                      [](double) { return 2.0; }, Smoothness::smooth);
        case Kind::abs_shift:
            return ScalarFunction::rough([a](double x) { return std::abs(x - a); }, Smoothness::lipschitz);
        case Kind::gaussian_bump:
            return ScalarFunction::c2([](double x) { return std::exp(-0.5 * x * x); },
                                      [](double x) { return -x * std::exp(-0.5 * x * x); },
                                      [](double x) { return (x * x - 1.0) * std::exp(-0.5 * x * x); },
                                      Smoothness::smooth);
        case Kind::constant: return ScalarFunction::constant(a);
        case Kind::step: return ScalarFunction::from_step(step);
    }
    throw DomainError("FunctionSpec: unknown kind");
}

ScalarFunction FunctionSpec::derivative() const {
    const double a = parameter;
    switch (kind) {
        case Kind::identity: return ScalarFunction::constant(1.0);
        case Kind::square:
            return ScalarFunction::c2([](double x) { return 2.0 * x; }, [](double) { return 2.0; },
                                      [](double) { return 0.0; }, Smoothness::smooth);
        case Kind::abs_shift:
            return ScalarFunction::rough([a](double x) { return sign_above(x, a); }, Smoothness::step);
        case Kind::gaussian_bump:
            return ScalarFunction::c1([](double x) { return -x * std::exp(-0.5 * x * x); },
                                      [](double x) { return (x * x - 1.0) * std::exp(-0.5 * x * x); },
                                      Smoothness::smooth);
        case Kind::constant: return ScalarFunction::constant(0.0);
        case Kind::step: break;
    }
    throw DomainError("FunctionSpec: a step function has no derivative in the catalog");
}

ScalarFunction FunctionSpec::antiderivative() const {
    const double a = parameter;
    switch (kind) {
        case Kind::identity:
            return ScalarFunction::c1([](double x) { return 0.5 * x * x; }, [](double x) { return x; },
                                      Smoothness::smooth);
        case Kind::square:
            return ScalarFunction::c1([](double x) { return x * x * x / 3.0; }, [](double x) { return x * x; },
                                      Smoothness::smooth);
        case Kind::abs_shift:
            // int_0^x |y - a| dy
            return ScalarFunction::c1(
                [a](double x) {
                    const auto g = [a](double y) { return 0.5 * (y - a) * std::abs(y - a); };
                    return g(x) - g(0.0);
                },
                [a](double x) { return std::abs(x - a); });
        case Kind::gaussian_bump:
            return ScalarFunction::c1(
                [](double x) { return std::sqrt(std::numbers::pi / 2.0) * std::erf(x / std::sqrt(2.0)); },
                [](double x) { return std::exp(-0.5 * x * x); }, Smoothness::smooth);
        case Kind::constant:
            return ScalarFunction::c1([a](double x) { return a * x; }, [a](double) { return a; }, Smoothness::smooth);
        case Kind::step: {
            // F(x) = int_0^x f, piecewise linear through the cumulative integral at each breakpoint.
            const StepFunction f = step;
            auto primitive = [f](double x) {
                const auto bp = f.breakpoints();
                const auto lv = f.levels();
                double total = 0.0;
                for (std::size_t j = 0; j < lv.size(); ++j) {
                    const double lo = bp[j];
                    const double hi = bp[j + 1];
                    total += lv[j] * (std::clamp(x, lo, hi) - lo);
                }
                return total;
            };
            const double F0 = primitive(0.0);
            return ScalarFunction::rough([primitive, F0](double x) { return primitive(x) - F0; },
                                         Smoothness::lipschitz);
        }
    }
    throw DomainError("FunctionSpec: unknown kind");
}

bool FunctionSpec::operator==(const FunctionSpec& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
        case Kind::abs_shift:
        case Kind::constant: return parameter == other.parameter;
        case Kind::step:
            return std::ranges::equal(step.breakpoints(), other.step.breakpoints()) &&
                   std::ranges::equal(step.levels(), other.step.levels());
        default: return true;
    }
}

FunctionSpec parse_function(std::string_view text) {
    const std::string s = trim(text);
    FunctionSpec spec;
    const auto open = s.find('(');
    const std::string head = trim(s.substr(0, open));
    std::string arg;
    if (open != std::string::npos) {
        if (s.back() != ')') throw DomainError("function '" + s + "': missing ')'");
        arg = s.substr(open + 1, s.size() - open - 2);
    }
    auto no_arg = [&](FunctionSpec::Kind k) {
        if (open != std::string::npos) throw DomainError("function " + head + " takes no argument");
        spec.kind = k;
    };
    auto one_arg = [&](FunctionSpec::Kind k) {
        if (open == std::string::npos) throw DomainError("function " + head + " needs an argument, e.g. " + head + "(0)");
        spec.kind = k;
        spec.parameter = parse_argument(head, arg);
    };
    if (head == "identity") no_arg(FunctionSpec::Kind::identity);
    else if (head == "square") no_arg(FunctionSpec::Kind::square);
    else if (head == "gaussian-bump") no_arg(FunctionSpec::Kind::gaussian_bump);
    else if (head == "step") no_arg(FunctionSpec::Kind::step);
    else if (head == "abs-shift") one_arg(FunctionSpec::Kind::abs_shift);
    else if (head == "constant") one_arg(FunctionSpec::Kind::constant);
    else throw DomainError("unknown function '" + s + "' (identity, square, abs-shift(a), gaussian-bump, constant(c), step)");
    return spec;
}

}  // namespace bifbm::harness
