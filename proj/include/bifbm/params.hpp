#pragma once

#include <cmath>

#include "bifbm/errors.hpp"

namespace bifbm {

// Tolerance on |2HK - 1| for a parameter pair to count as critical.
inline constexpr double kCriticalTolerance = 1e-12;

// Index pair (H, K) of a bi-fractional Brownian motion.
//
// The regular constructor enforces the critical curve 2HK = 1, which every
// identity in this library assumes. `ModelParams::unconstrained` admits any
// pair in (0,1) x (0,1]; the covariance and sampler accept such pairs, the
// identity-bearing estimators reject them.
class ModelParams {
public:
    ModelParams(double H, double K) : ModelParams(H, K, true) {}

    static ModelParams unconstrained(double H, double K) { return ModelParams(H, K, false); }

    // K = 1/(2H); the canonical way to get an exactly critical pair.
    static ModelParams from_hurst(double H) { return ModelParams(H, 1.0 / (2.0 * H)); }

    double H() const noexcept { return H_; }
    double K() const noexcept { return K_; }

    bool is_critical() const noexcept { return std::abs(2.0 * H_ * K_ - 1.0) <= kCriticalTolerance; }

    // Throws DomainError naming `what` unless the pair is critical.
    void require_critical(const char* what) const;

    // Quadratic variation rate: [B,B]_t = 2^{1-K} t.
    double qv_constant() const noexcept { return std::exp2(1.0 - K_); }
    // Ito correction coefficient 2^{K-2} in front of [f(B),B].
    double ito_constant() const noexcept { return std::exp2(K_ - 2.0); }
    // Forward minus Skorohod integral is (1/2)(2^{K-1} - 1) [f(B),B].
    double skorohod_correction() const noexcept { return 0.5 * (std::exp2(K_ - 1.0) - 1.0); }

    bool operator==(const ModelParams&) const = default;

private:
    ModelParams(double H, double K, bool critical);

    double H_;
    double K_;
};

}  // namespace bifbm
