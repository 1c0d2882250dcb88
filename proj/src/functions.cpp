#include "bifbm/functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "bifbm/errors.hpp"

namespace bifbm {

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> levels)
    : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
    if (breakpoints_.empty() && levels_.empty()) return;
    if (breakpoints_.size() != levels_.size() + 1) {
        throw DomainError("StepFunction: need exactly one more breakpoint than levels (got " +
                          std::to_string(breakpoints_.size()) + " breakpoints, " +
                          std::to_string(levels_.size()) + " levels)");
    }
    for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
        if (!std::isfinite(breakpoints_[j])) throw DomainError("StepFunction: non-finite breakpoint");
        if (j > 0 && !(breakpoints_[j] > breakpoints_[j - 1])) {
            throw DomainError("StepFunction: breakpoints must be strictly increasing");
        }
    }
}

double StepFunction::operator()(double x) const noexcept {
    if (levels_.empty() || !(x > breakpoints_.front()) || x > breakpoints_.back()) return 0.0;
    // first a_j >= x; then a_{j-1} < x <= a_j
    const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return levels_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double StepFunction::sup_abs() const noexcept {
    double m = 0.0;
    for (double v : levels_) m = std::max(m, std::abs(v));
    return m;
}

StepFunction StepFunction::scaled(double c) const {
    StepFunction out = *this;
    for (double& v : out.levels_) v *= c;
    return out;
}

StepFunction StepFunction::linear_combination(double alpha, const StepFunction& other, double beta) const {
    if (empty()) return other.scaled(beta);
    if (other.empty()) return scaled(alpha);
    std::vector<double> knots;
    knots.reserve(breakpoints_.size() + other.breakpoints_.size());
    std::merge(breakpoints_.begin(), breakpoints_.end(), other.breakpoints_.begin(), other.breakpoints_.end(),
               std::back_inserter(knots));
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::vector<double> levels(knots.size() - 1);
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
        // Any interior point of (knot_j, knot_{j+1}] evaluates the piece; the right end is exact.
        const double x = knots[j + 1];
        levels[j] = alpha * (*this)(x) + beta * other(x);
    }
    return StepFunction(std::move(knots), std::move(levels));
}

StepFunction StepFunction::plus(const StepFunction& other) const { return linear_combination(1.0, other, 1.0); }

std::string_view to_string(Smoothness s) noexcept {
    switch (s) {
        case Smoothness::step: return "step";
        case Smoothness::lipschitz: return "lipschitz";
        case Smoothness::c1: return "c1";
        case Smoothness::c2: return "c2";
        case Smoothness::smooth: return "smooth";
    }
    return "unknown";
}

namespace {

constexpr std::array<double, 9> kProbes{-2.3, -1.1, -0.37, -0.013, 0.29, 0.71, 1.3, 1.9, 2.7};

void check_second_derivative(const ScalarFunction::Fn& df, const ScalarFunction::Fn& d2f) {
    for (double x : kProbes) {
        // Richardson-extrapolated central difference, O(h^4).
        const double h = 1e-3 * std::max(1.0, std::abs(x));
        const double coarse = (df(x + h) - df(x - h)) / (2.0 * h);
        const double fine = (df(x + 0.5 * h) - df(x - 0.5 * h)) / h;
        const double fd = (4.0 * fine - coarse) / 3.0;
        const double exact = d2f(x);
        if (std::abs(fd - exact) > 1e-5 * std::max(1.0, std::abs(exact))) {
            throw DomainError("ScalarFunction: second derivative disagrees with a central difference of the "
                              "first derivative at x=" + std::to_string(x));
        }
    }
}

}  // namespace

std::span<const double> ScalarFunction::probe_points() noexcept { return kProbes; }

ScalarFunction ScalarFunction::rough(Fn f, Smoothness tag) {
    if (tag != Smoothness::step && tag != Smoothness::lipschitz) {
        throw DomainError("ScalarFunction::rough: tag must be step or lipschitz");
    }
    return ScalarFunction(std::move(f), {}, {}, tag);
}

ScalarFunction ScalarFunction::c1(Fn f, Fn df, Smoothness tag) {
    if (tag != Smoothness::c1 && tag != Smoothness::smooth) {
        throw DomainError("ScalarFunction::c1: tag must be c1 or smooth");
    }
    if (!df) throw DomainError("ScalarFunction::c1: derivative handle required");
    return ScalarFunction(std::move(f), std::move(df), {}, tag);
}

ScalarFunction ScalarFunction::c2(Fn f, Fn df, Fn d2f, Smoothness tag) {
    if (tag != Smoothness::c2 && tag != Smoothness::smooth) {
        throw DomainError("ScalarFunction::c2: tag must be c2 or smooth");
    }
    if (!df || !d2f) throw DomainError("ScalarFunction::c2: first and second derivative handles required");
    check_second_derivative(df, d2f);
    return ScalarFunction(std::move(f), std::move(df), std::move(d2f), tag);
}

ScalarFunction ScalarFunction::from_step(const StepFunction& step) {
    return ScalarFunction([step](double x) { return step(x); }, {}, {}, Smoothness::step);
}

ScalarFunction ScalarFunction::constant(double c) {
    return ScalarFunction([c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                          Smoothness::smooth);
}

double ScalarFunction::derivative(double x) const {
    if (!df_) throw DomainError("ScalarFunction: no derivative handle (smoothness " + std::string(to_string(tag_)) + ")");
    return df_(x);
}

double ScalarFunction::second_derivative(double x) const {
    if (!d2f_) throw DomainError("ScalarFunction: no second derivative handle");
    return d2f_(x);
}

}  // namespace bifbm
