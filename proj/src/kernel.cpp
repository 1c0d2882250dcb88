#include "bifbm/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bifbm/quadrature.hpp"

namespace bifbm {

ModelParams::ModelParams(double H, double K, bool critical) : H_(H), K_(K) {
    if (!(H > 0.0 && H < 1.0)) throw DomainError("ModelParams: H must lie in (0,1), got " + std::to_string(H));
    if (!(K > 0.0 && K <= 1.0)) throw DomainError("ModelParams: K must lie in (0,1], got " + std::to_string(K));
    if (critical && !is_critical()) {
        throw DomainError("ModelParams: 2HK = " + std::to_string(2.0 * H * K) +
                          " violates the critical constraint 2HK = 1 (use K = 1/(2H))");
    }
}

void ModelParams::require_critical(const char* what) const {
    if (!is_critical()) {
        throw DomainError(std::string(what) + ": requires 2HK = 1, got 2HK = " + std::to_string(2.0 * H_ * K_));
    }
}

namespace {

void require_time(double t, const char* what) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError(std::string(what) + ": time must be finite and >= 0, got " + std::to_string(t));
    }
}

}  // namespace

double covariance(const ModelParams& p, double s, double t) {
    require_time(s, "covariance");
    require_time(t, "covariance");
    const double H2 = 2.0 * p.H();
    const double K = p.K();
    const double sum = std::pow(t, H2) + std::pow(s, H2);
    return std::exp2(-K) * (std::pow(sum, K) - std::pow(std::abs(t - s), H2 * K));
}

double increment_covariance(const ModelParams& p, double s, double t, double s2, double t2) {
    require_time(s, "increment_covariance");
    require_time(s2, "increment_covariance");
    if (!(t > s) || !(t2 > s2)) throw DomainError("increment_covariance: intervals must satisfy t > s");
    return covariance(p, t, t2) - covariance(p, t, s2) - covariance(p, s, t2) + covariance(p, s, s2);
}

Moments moments(const ModelParams& p, double s, double r) {
    require_time(r, "moments");
    if (!(s >= r)) throw DomainError("moments: requires s >= r");
    const double mu = covariance(p, s, r);
    return {mu, s * r - mu * mu, s, r};
}

double heat_kernel(double s, double x) {
    if (!(s > 0.0)) throw DomainError("heat_kernel: variance s must be > 0");
    return std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * std::numbers::pi * s);
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double Phi(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// z * phi(z), with the infinite-argument limit 0.
double z_phi(double z) {
    if (std::isinf(z)) return 0.0;
    return z * kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double scaled(double a, double u) {
    if (u > 0.0) return a / u;
    if (a > 0.0) return std::numeric_limits<double>::infinity();
    if (a < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
}

}  // namespace

double hnorm(const StepFunction& f, double T) {
    if (!(T > 0.0)) throw DomainError("hnorm: horizon T must be > 0");
    if (f.empty()) return 0.0;
    const auto a = f.breakpoints();
    const auto c = f.levels();

    // With s = u^2 the s-integrand is 2u * sum_j c_j^2 [ P_j + Q_j ] where
    //   P_j = int phi_s dx over the piece = Phi(beta) - Phi(alpha)
    //   Q_j = int x^2 phi_s dx / s        = Phi(beta) - Phi(alpha) - (beta phi(beta) - alpha phi(alpha))
    // and alpha, beta are the piece ends divided by u.
    auto integrand = [&](double u) {
        double total = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (c[j] == 0.0) continue;
            const double alpha = scaled(a[j], u);
            const double beta = scaled(a[j + 1], u);
            const double mass = Phi(beta) - Phi(alpha);
            total += c[j] * c[j] * (2.0 * mass - (z_phi(beta) - z_phi(alpha)));
        }
        return 2.0 * u * total;
    };
    const double sq = quad::adaptive_simpson(integrand, 0.0, std::sqrt(T), {.rel_tol = 1e-8});
    return std::sqrt(std::max(sq, 0.0));
}

double hnorm_weight(double x, double T) {
    if (!(T > 0.0)) throw DomainError("hnorm_weight: horizon T must be > 0");
    auto integrand = [x](double u) {
        if (u == 0.0) return x == 0.0 ? 2.0 * kInvSqrt2Pi : 0.0;
        const double q = x * x / (u * u);
        return 2.0 * kInvSqrt2Pi * std::exp(-0.5 * q) * (1.0 + q);
    };
    return quad::adaptive_simpson(integrand, 0.0, std::sqrt(T), {.rel_tol = 1e-10});
}

double hnorm(const std::function<double(double)>& f, double T, std::span<const double> pieces) {
    if (!(T > 0.0)) throw DomainError("hnorm: horizon T must be > 0");
    if (pieces.size() < 2) return 0.0;
    double sq = 0.0;
    for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
        if (!(pieces[k + 1] > pieces[k])) throw DomainError("hnorm: piece boundaries must be increasing");
        auto integrand = [&](double x) {
            const double v = f(x);
            return v == 0.0 ? 0.0 : v * v * hnorm_weight(x, T);
        };
        sq += quad::adaptive_simpson(integrand, pieces[k], pieces[k + 1], {.rel_tol = 1e-8, .abs_tol = 1e-300});
    }
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace bifbm
