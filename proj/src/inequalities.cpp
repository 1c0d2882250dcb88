#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "bifbm/kernel.hpp"
#include "bifbm/rng.hpp"

namespace bifbm {

std::size_t InequalityReport::total_violations() const {
    std::size_t n = 0;
    for (const auto& c : checks) {
        if (c.constant) n += c.violations;
    }
    return n;
}

const InequalityCheck& InequalityReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw DomainError("InequalityReport: no check named '" + name + "'");
}

namespace {

class Tracker {
public:
    Tracker(std::string name, std::optional<double> constant, bool lower, double T) : T_(T) {
        check_.name = std::move(name);
        check_.constant = constant;
        check_.lower_bound = lower;
        check_.min_ratio = std::numeric_limits<double>::infinity();
        check_.max_ratio = -std::numeric_limits<double>::infinity();
    }

    // Bound reads lhs <= c * base (or >= for lower bounds), base > 0.
    void record(double lhs, double base) {
        ++check_.samples;
        const double ratio = lhs / base;
        check_.min_ratio = std::min(check_.min_ratio, ratio);
        check_.max_ratio = std::max(check_.max_ratio, ratio);
        if (!check_.constant) return;
        const double bound = *check_.constant * base;
        // Round-off allowance: covariances are O(T) and the bounds are differences of them.
        const double tol = 1e-9 * (std::abs(lhs) + std::abs(bound)) + 1e-13 * T_;
        const bool broken = check_.lower_bound ? (lhs < bound - tol) : (lhs > bound + tol);
        if (broken) ++check_.violations;
    }

    InequalityCheck take() && { return std::move(check_); }

private:
    InequalityCheck check_;
    double T_;
};

template <std::size_t N>
std::array<double, N> sorted_tuple(rng::Stream& stream, double lo, double hi) {
    std::array<double, N> u{};
    for (auto& v : u) v = lo + (hi - lo) * stream.uniform();
    std::sort(u.begin(), u.end());
    return u;
}

}  // namespace

InequalityReport lemma_scan(const ModelParams& p, std::size_t sample_pairs, std::uint64_t seed, double T) {
    p.require_critical("lemma_scan");
    if (sample_pairs < 1) throw DomainError("lemma_scan: sample_pairs must be >= 1");
    if (!(T > 0.0)) throw DomainError("lemma_scan: T must be > 0");

    const double H = p.H();
    const double K = p.K();
    const double lo = 1e-3 * T;
    auto R = [&](double a, double b) { return covariance(p, a, b); };

    InequalityReport report{p, T, seed, {}};

    // Pairs r < s: rho^2 bracket and r - mu, s - mu bounds.
    {
        Tracker rho_lower("rho2_lower", 1.0, true, T);
        Tracker rho_upper("rho2_upper", 1.0 + std::exp2(1.0 - 2.0 * K), false, T);
        Tracker r_mu("r_minus_mu", std::nullopt, false, T);
        Tracker s_mu("s_minus_mu_lower", 1.0, true, T);
        rng::Stream stream(seed, 0);
        for (std::size_t i = 0; i < sample_pairs; ++i) {
            const auto [r, s] = sorted_tuple<2>(stream, lo, T);
            if (!(s > r)) continue;
            const Moments m = moments(p, s, r);
            const double gap = r * (s - r);
            rho_lower.record(m.rho2, gap);
            rho_upper.record(m.rho2, gap);
            r_mu.record(r - m.mu, r / s * (s - r));
            s_mu.record(s - m.mu, s - r);
        }
        for (auto* t : {&rho_lower, &rho_upper, &r_mu, &s_mu}) report.checks.push_back(std::move(*t).take());
    }

    // Ordered quadruples s' < t' <= s < t: increment covariance of disjoint intervals.
    {
        Tracker decay("disjoint_increment_decay", 1.0, false, T);
        Tracker sign("disjoint_increment_sign", 0.0, true, T);
        Tracker upper("disjoint_increment_upper", 1.0, false, T);
        rng::Stream stream(seed, 1);
        for (std::size_t i = 0; i < sample_pairs; ++i) {
            const auto [s2, t2, s, t] = sorted_tuple<4>(stream, lo, T);
            if (!(t > s && t2 > s2)) continue;
            const double cov = increment_covariance(p, s, t, s2, t2);
            const double base = (t - s) * (t2 - s2) / s;
            decay.record(std::abs(cov), base);
            sign.record(-cov, base);
            upper.record(-cov, (t - s) * std::pow(t2 - s2, 1.0 - H) / ((1.0 - H) * std::pow(s, 1.0 - H)));
        }
        for (auto* tr : {&decay, &sign, &upper}) report.checks.push_back(std::move(*tr).take());
    }

    // Triples r < s < t: cross moments of one value against an increment.
    {
        Tracker cross_st("cross_moment_st", std::nullopt, false, T);
        Tracker cross_r("cross_moment_r", 1.0, false, T);
        Tracker cross_s("cross_moment_s", 4.0, false, T);
        Tracker cross_t("cross_moment_t", 2.0, false, T);
        rng::Stream stream(seed, 2);
        for (std::size_t i = 0; i < sample_pairs; ++i) {
            const auto [r, s, t] = sorted_tuple<3>(stream, lo, T);
            if (!(t > s && s > r)) continue;
            cross_st.record(std::abs(R(s, t) - R(s, s)), s / t * (t - s));
            cross_r.record(std::abs(R(r, t) - R(r, s)), r / s * (t - s));
            cross_s.record(std::abs(R(s, t) - R(s, r)), t - r);
            cross_t.record(std::abs(R(t, s) - R(t, r)), s - r);
        }
        for (auto* tr : {&cross_st, &cross_r, &cross_s, &cross_t}) report.checks.push_back(std::move(*tr).take());
    }

    // Pairs s < t: increment variance (quasi-helix).
    {
        Tracker lower("quasi_helix_lower", std::exp2(-K), true, T);
        Tracker upper("quasi_helix_upper", std::exp2(1.0 - K), false, T);
        Tracker improved("quasi_helix_improved_lower", 1.0, true, T);
        rng::Stream stream(seed, 3);
        for (std::size_t i = 0; i < sample_pairs; ++i) {
            const auto [s, t] = sorted_tuple<2>(stream, lo, T);
            if (!(t > s)) continue;
            const double var = R(t, t) + R(s, s) - 2.0 * R(s, t);
            const double base = std::pow(t - s, 2.0 * H * K);
            lower.record(var, base);
            upper.record(var, base);
            improved.record(var, base);
        }
        for (auto* tr : {&lower, &upper, &improved}) report.checks.push_back(std::move(*tr).take());
    }

    return report;
}

bool elementary_inequality_check(double alpha, double beta, std::size_t grid) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("elementary_inequality_check: alpha must lie in [0,1]");
    if (!(beta >= 1.0) || !std::isfinite(beta)) throw DomainError("elementary_inequality_check: beta must be >= 1");
    if (grid < 2) throw DomainError("elementary_inequality_check: grid must be >= 2");

    constexpr double kTol = 1e-12;
    const double ca = std::exp2(alpha) - 1.0;
    const double cb = std::exp2(beta) - 1.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(grid - 1);
        const double concave_rhs = 1.0 + ca * std::pow(x, alpha);
        if (std::pow(1.0 + x, alpha) > concave_rhs + kTol * std::max(1.0, concave_rhs)) return false;
        const double convex_rhs = 1.0 + cb * std::pow(x, beta);
        if (std::pow(1.0 + x, beta) < convex_rhs - kTol * std::max(1.0, convex_rhs)) return false;
    }
    return true;
}

}  // namespace bifbm
