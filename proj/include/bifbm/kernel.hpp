#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bifbm/functions.hpp"
#include "bifbm/params.hpp"

namespace bifbm {

// R(t,s) = 2^{-K} [ (t^{2H} + s^{2H})^K - |t-s|^{2HK} ].
double covariance(const ModelParams& p, double s, double t);

// E[(B_t - B_s)(B_{t2} - B_{s2})] for t > s >= 0 and t2 > s2 >= 0.
double increment_covariance(const ModelParams& p, double s, double t, double s2, double t2);

struct Moments {
    double mu;    // E[B_s B_r]
    double rho2;  // s r - mu^2
    double s;
    double r;
};

// Requires s >= r >= 0 (no silent swap).
Moments moments(const ModelParams& p, double s, double r);

// Gaussian density with variance s > 0.
double heat_kernel(double s, double x);

// ||f||_H over [0,T] for a step function: per-piece closed forms in x,
// adaptive Simpson in s (after s = u^2) at relative tolerance 1e-8.
double hnorm(const StepFunction& f, double T);

// Same norm for an arbitrary function supported on [pieces.front(), pieces.back()],
// integrated piecewise between consecutive `pieces` (place discontinuities there).
double hnorm(const std::function<double(double)>& f, double T, std::span<const double> pieces);

// x-weight of the H-norm: w(x) = int_0^T phi_s(x) (1 + x^2/s) ds.
double hnorm_weight(double x, double T);

// One inequality evaluated over random admissible tuples. For explicit-constant
// checks `violations` counts tuples that break the bound; `min_ratio`/`max_ratio`
// are the extreme values of lhs / base where the bound reads lhs <= constant * base
// (or lhs >= constant * base for lower bounds).
struct InequalityCheck {
    std::string name;
    std::optional<double> constant;  // empty: constant unspecified, empirical only
    bool lower_bound = false;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
};

struct InequalityReport {
    ModelParams params;
    double T = 1.0;
    std::uint64_t seed = 0;
    std::vector<InequalityCheck> checks;

    std::size_t total_violations() const;
    const InequalityCheck& find(const std::string& name) const;
};

// Random-tuple scan of the covariance inequalities (rho^2 bracket, r - mu,
// increment covariances, quasi-helix bounds). Tuples are uniform order
// statistics on (1e-3 T, T].
InequalityReport lemma_scan(const ModelParams& p, std::size_t sample_pairs, std::uint64_t seed, double T = 1.0);

// (1+x)^alpha <= 1 + (2^alpha - 1) x^alpha and (1+x)^beta >= 1 + (2^beta - 1) x^beta
// on `grid` uniform points of [0,1], with tolerance 1e-12.
bool elementary_inequality_check(double alpha, double beta, std::size_t grid);

}  // namespace bifbm
