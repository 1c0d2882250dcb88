#include <cmath>
#include <numbers>

#include <doctest.h>

#include "bifbm/quadrature.hpp"

using bifbm::quad::adaptive_simpson;

TEST_SUITE("quadrature") {

TEST_CASE("smooth integrands reach the requested relative accuracy") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
          doctest::Approx(2.0).epsilon(1e-10));
    CHECK(adaptive_simpson([](double x) { return std::exp(x); }, -1.0, 1.0) ==
          doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("square-root endpoint singularity still converges") {
    CHECK(adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("tolerance option is honoured") {
    bifbm::quad::Options tight;
    tight.rel_tol = 1e-12;
    const double v = adaptive_simpson([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, tight);
    CHECK(std::abs(v - std::numbers::pi / 4.0) < 1e-11);
}

}
