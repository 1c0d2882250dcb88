#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "bifbm/kernel.hpp"
#include "bifbm/localtime.hpp"

using namespace bifbm;

TEST_SUITE("mollifier") {

TEST_CASE("normalising constant and unit mass") {
    CHECK(MollifierFamily::normalizing_constant() == doctest::Approx(2.25228362104358101).epsilon(1e-12));
    for (std::size_t n : {1u, 4u, 16u, 64u, 256u}) {
        const MollifierFamily z{n};
        CHECK(std::abs(z.mass() - 1.0) <= 1e-8);
        CHECK(z.cdf(0.0) == 0.0);
        CHECK(z.cdf(2.0 / static_cast<double>(n)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(z.density(-0.1) == 0.0);
        CHECK(z.density(2.0 / static_cast<double>(n) + 1e-9) == 0.0);
    }
}

TEST_CASE("cdf, density and derivative are mutually consistent") {
    const MollifierFamily z{4};
    const double h = 1e-6;
    double prev = 0.0;
    for (int i = 1; i < 100; ++i) {
        const double x = 0.5 * i / 100.0;
        CHECK(z.cdf(x) >= prev);
        prev = z.cdf(x);
        CHECK((z.cdf(x + h) - z.cdf(x - h)) / (2 * h) == doctest::Approx(z.density(x)).epsilon(1e-5).scale(1.0));
        CHECK((z.density(x + h) - z.density(x - h)) / (2 * h) == doctest::Approx(z.derivative(x)).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("mollified constants and plateaus are exact") {
    const StepFunction f({-5.0, 5.0}, {2.5});
    for (std::size_t n : {4u, 16u, 64u}) {
        const auto fn = mollify(f, n);
        CHECK(fn.smoothness() == Smoothness::smooth);
        CHECK(fn.has_derivative());
        for (double x : {-4.0, -1.0, 0.0, 2.0, 5.0}) {
            CHECK(fn(x) == doctest::Approx(2.5).epsilon(1e-12));
            CHECK(std::abs(fn.derivative(x)) < 1e-9);
        }
    }
}

TEST_CASE("mollified step: bounded, convergent, with consistent derivative") {
    const StepFunction f({-1.0, 0.0, 0.5, 1.0}, {1.0, -2.0, 0.5});
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::size_t n : {4u, 16u, 64u}) {
        const auto fn = mollify(f, n);
        for (int i = 0; i < 500; ++i) {
            const double x = u(gen);
            CHECK(std::abs(fn(x)) <= f.sup_abs() + 1e-12);
            const double h = 1e-6;
            CHECK((fn(x + h) - fn(x - h)) / (2 * h) == doctest::Approx(fn.derivative(x)).epsilon(1e-4).scale(1.0 + n));
        }
    }
    for (double x : {-0.7, 0.3, 0.8}) {
        double prev = INFINITY;
        for (std::size_t n : {2u, 8u, 32u, 128u}) {
            const double err = std::abs(mollify(f, n)(x) - f(x));
            CHECK(err <= prev + 1e-15);
            prev = err;
        }
        CHECK(prev < 1e-12);
    }
}

TEST_CASE("H-norm gap decreases and matches a direct evaluation") {
    const StepFunction f = StepFunction::indicator(0.0, 1.0);
    std::vector<double> gaps;
    for (std::size_t n : {4u, 16u, 64u}) {
        const double g = mollifier_gap(f, n, 1.0);
        gaps.push_back(g);
        const auto fn = mollify(f, n);
        const double w = 2.0 / static_cast<double>(n);
        std::vector<double> pieces{0.0, w, 1.0, 1.0 + w};
        CHECK(hnorm([&](double x) { return fn(x) - f(x); }, 1.0, pieces) == doctest::Approx(g).epsilon(1e-6));
    }
    CHECK(gaps[0] > gaps[1]);
    CHECK(gaps[1] > gaps[2]);
}

}
