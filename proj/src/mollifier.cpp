#include <algorithm>
#include <cmath>
#include <vector>

#include "bifbm/errors.hpp"
#include "bifbm/kernel.hpp"
#include "bifbm/localtime.hpp"
#include "bifbm/quadrature.hpp"

namespace bifbm {

namespace {

// Unnormalized bump exp(1 / ((x-1)^2 - 1)) on (0, 2).
double bump(double x) {
    if (!(x > 0.0 && x < 2.0)) return 0.0;
    const double d = (x - 1.0) * (x - 1.0) - 1.0;
    return std::exp(1.0 / d);
}

double bump_derivative(double x) {
    if (!(x > 0.0 && x < 2.0)) return 0.0;
    const double d = (x - 1.0) * (x - 1.0) - 1.0;
    return std::exp(1.0 / d) * (-2.0 * (x - 1.0) / (d * d));
}

// CDF of the normalized bump on [0, 2], tabulated on a uniform grid and
// evaluated by cubic Hermite interpolation with the density as slope.
class BumpCdf {
public:
    static constexpr std::size_t kIntervals = 2048;

    BumpCdf() : cdf_(kIntervals + 1, 0.0) {
        const double h = 2.0 / kIntervals;
        double acc = 0.0;
        for (std::size_t i = 0; i < kIntervals; ++i) {
            const double a = h * static_cast<double>(i);
            acc += quad::adaptive_simpson(bump, a, a + h, {.rel_tol = 1e-12, .abs_tol = 1e-300});
            cdf_[i + 1] = acc;
        }
        c_ = 1.0 / acc;
        for (double& v : cdf_) v *= c_;
        cdf_.back() = 1.0;
    }

    double c() const noexcept { return c_; }

    double operator()(double x) const noexcept {
        if (x <= 0.0) return 0.0;
        if (x >= 2.0) return 1.0;
        const double h = 2.0 / kIntervals;
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(x / h), kIntervals - 1);
        const double x0 = h * static_cast<double>(i);
        const double u = (x - x0) / h;
        const double u2 = u * u;
        const double u3 = u2 * u;
        const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        const double h10 = u3 - 2.0 * u2 + u;
        const double h01 = -2.0 * u3 + 3.0 * u2;
        const double h11 = u3 - u2;
        const double m0 = c_ * bump(x0);
        const double m1 = c_ * bump(x0 + h);
        return h00 * cdf_[i] + h10 * h * m0 + h01 * cdf_[i + 1] + h11 * h * m1;
    }

private:
    std::vector<double> cdf_;
    double c_ = 0.0;
};

const BumpCdf& bump_cdf() {
    static const BumpCdf table;
    return table;
}

void require_order(std::size_t n) {
    if (n < 1) throw DomainError("mollifier order must be >= 1");
}

}  // namespace

double MollifierFamily::normalizing_constant() { return bump_cdf().c(); }

double MollifierFamily::density(double x) const {
    require_order(order);
    const double n = static_cast<double>(order);
    return n * normalizing_constant() * bump(n * x);
}

double MollifierFamily::derivative(double x) const {
    require_order(order);
    const double n = static_cast<double>(order);
    return n * n * normalizing_constant() * bump_derivative(n * x);
}

double MollifierFamily::cdf(double x) const {
    require_order(order);
    return bump_cdf()(static_cast<double>(order) * x);
}

double MollifierFamily::mass() const {
    require_order(order);
    const double n = static_cast<double>(order);
    return quad::adaptive_simpson([this](double x) { return density(x); }, 0.0, 2.0 / n, {.rel_tol = 1e-12});
}

ScalarFunction mollify(const StepFunction& f, std::size_t n) {
    require_order(n);
    const MollifierFamily zeta{n};
    const std::vector<double> a(f.breakpoints().begin(), f.breakpoints().end());
    const std::vector<double> c(f.levels().begin(), f.levels().end());
    // f(x - y) = f_j exactly when x - a_j <= y < x - a_{j-1}.
    auto value = [a, c, zeta](double x) {
        double total = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) total += c[j] * (zeta.cdf(x - a[j]) - zeta.cdf(x - a[j + 1]));
        return total;
    };
    auto slope = [a, c, zeta](double x) {
        double total = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            total += c[j] * (zeta.density(x - a[j]) - zeta.density(x - a[j + 1]));
        }
        return total;
    };
    return ScalarFunction::c1(value, slope, Smoothness::smooth);
}

double mollifier_gap(const StepFunction& f, std::size_t n, double T) {
    if (f.empty()) return 0.0;
    const auto fn = mollify(f, n);
    const double width = 2.0 / static_cast<double>(n);
    std::vector<double> cuts;
    for (double a : f.breakpoints()) {
        cuts.push_back(a);
        cuts.push_back(a + width);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // f is constant between consecutive cuts; take its value at the midpoint so
    // the quadrature never sees the jump at an endpoint.
    double sq = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double level = f(0.5 * (cuts[k] + cuts[k + 1]));
        const double piece[] = {cuts[k], cuts[k + 1]};
        const double part = hnorm([&](double x) { return fn(x) - level; }, T, piece);
        sq += part * part;
    }
    return std::sqrt(sq);
}

}  // namespace bifbm
