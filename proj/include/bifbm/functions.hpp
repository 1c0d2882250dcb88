#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace bifbm {

// Elementary function sum_j levels[j-1] * 1_{(a_{j-1}, a_j]}; zero outside (a_0, a_N].
class StepFunction {
public:
    StepFunction() = default;
    // breakpoints strictly increasing, levels.size() == breakpoints.size() - 1.
    StepFunction(std::vector<double> breakpoints, std::vector<double> levels);

    static StepFunction indicator(double a, double b) { return StepFunction({a, b}, {1.0}); }

    // Left-continuous with right limits: f(a_j) = levels[j-1].
    double operator()(double x) const noexcept;

    std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    std::span<const double> levels() const noexcept { return levels_; }
    std::size_t pieces() const noexcept { return levels_.size(); }
    bool empty() const noexcept { return levels_.empty(); }
    double sup_abs() const noexcept;

    StepFunction scaled(double c) const;
    // Pointwise combination over the union of breakpoints.
    StepFunction plus(const StepFunction& other) const;
    StepFunction linear_combination(double alpha, const StepFunction& other, double beta) const;

private:
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
};

enum class Smoothness { step, lipschitz, c1, c2, smooth };

std::string_view to_string(Smoothness s) noexcept;

// Real function with a declared regularity and, from c1 on, its derivatives.
class ScalarFunction {
public:
    using Fn = std::function<double(double)>;

    // step / lipschitz functions carry no derivative.
    static ScalarFunction rough(Fn f, Smoothness tag = Smoothness::lipschitz);
    // tag c1 or smooth; a smooth function built here carries no second derivative.
    static ScalarFunction c1(Fn f, Fn df, Smoothness tag = Smoothness::c1);
    // c2 and smooth tags validate `d2f` against a central difference of `df`
    // at fixed probe points (relative error <= 1e-5) and throw DomainError on mismatch.
    static ScalarFunction c2(Fn f, Fn df, Fn d2f, Smoothness tag = Smoothness::c2);

    static ScalarFunction from_step(const StepFunction& step);
    static ScalarFunction constant(double c);

    double operator()(double x) const { return f_(x); }
    double derivative(double x) const;
    double second_derivative(double x) const;

    bool has_derivative() const noexcept { return static_cast<bool>(df_); }
    bool has_second_derivative() const noexcept { return static_cast<bool>(d2f_); }
    Smoothness smoothness() const noexcept { return tag_; }

    // Probe points used by the c2 consistency check.
    static std::span<const double> probe_points() noexcept;

private:
    ScalarFunction(Fn f, Fn df, Fn d2f, Smoothness tag)
        : f_(std::move(f)), df_(std::move(df)), d2f_(std::move(d2f)), tag_(tag) {}

    Fn f_;
    Fn df_;
    Fn d2f_;
    Smoothness tag_;
};

}  // namespace bifbm
