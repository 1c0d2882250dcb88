#include <cmath>
#include <cstdlib>
#include <vector>

#include <doctest.h>

#include "bifbm/errors.hpp"
#include "bifbm/estimators.hpp"
#include "bifbm/sampler.hpp"
#include "oracles.hpp"

using namespace bifbm;

namespace {

const ModelParams kBrownian(0.5, 1.0);
const ModelParams kMain(0.75, 2.0 / 3.0);

const ScalarFunction kIdentity =
    ScalarFunction::c2([](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; });
const ScalarFunction kSquare =
    ScalarFunction::c2([](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; });
const ScalarFunction kTwiceX =
    ScalarFunction::c2([](double x) { return 2.0 * x; }, [](double) { return 2.0; }, [](double) { return 0.0; });

// One shared batch keeps the suite fast: n = 1024, m = 8, 300 paths.
const PathBatch& main_batch() {
    static const PathBatch b = sample_paths(kMain, TimeGrid(1.0, 1024, 16), 300, 2718);
    return b;
}

EstimatorConfig config(std::vector<double> times, std::size_t m = 8) {
    EstimatorConfig c;
    c.epsilon_steps = m;
    c.eval_times = std::move(times);
    return c;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("config validation") {
    const auto& b = main_batch();
    CHECK(config({0.5, 1.0}).validate(b) == std::vector<std::size_t>{512, 1024});
    CHECK_THROWS_AS(config({0.3333}).validate(b), DomainError);
    CHECK_THROWS_AS(config({1.0}, 17).validate(b), DomainError);
    CHECK_THROWS_AS(config({1.0}, 0).validate(b), DomainError);
    CHECK_THROWS_AS(config({}).validate(b), DomainError);
    CHECK_THROWS_AS(config({0.0}).validate(b), DomainError);
    CHECK(config({1.0}).epsilon(b.grid()) == doctest::Approx(8.0 / 1024.0));
}

TEST_CASE("report aggregates and label plumbing") {
    const auto& b = main_batch();
    const auto qv = quadratic_variation(b, config({0.5, 1.0}));
    CHECK(qv.label == "quadratic_variation");
    CHECK(qv.rows.size() == 2);
    CHECK(qv.at(1.0).n_paths == 300);
    CHECK(qv.at(1.0).mean == doctest::Approx(oracle::mean(qv.samples_at(1.0))));
    CHECK(qv.at(1.0).std_error == doctest::Approx(oracle::std_error(qv.samples_at(1.0))));
    CHECK(qv.echo.epsilon == doctest::Approx(8.0 / 1024.0));
    CHECK(qv.echo.seed == 2718);
    CHECK_THROWS_AS(qv.at(0.25), DomainError);
    const auto twice = qv.combined(1.0, qv, 1.0, "twice");
    CHECK(twice.label == "twice");
    CHECK(twice.samples_at(1.0)[3] == 2.0 * qv.samples_at(1.0)[3]);
    const auto neg = qv.combined(-1.0, qv, 0.0, "neg").absolute("abs");
    CHECK(neg.samples_at(0.5) == qv.samples_at(0.5));
}

TEST_CASE("quadratic variation examples") {
    const auto brown = sample_paths(kBrownian, TimeGrid(1.0, 1024, 8), 400, 1);
    const auto b = quadratic_variation(brown, config({1.0})).at(1.0);
    CHECK(std::abs(b.mean - 1.0) <= 3.0 * b.std_error);

    const auto m = quadratic_variation(main_batch(), config({1.0})).at(1.0);
    CHECK(std::abs(m.mean - std::cbrt(2.0)) <= std::max(0.05 * std::cbrt(2.0), 3.0 * m.std_error));

    const TimeGrid g(1.0, 64, 4);
    const PathBatch zero(g, kMain, 0, 3, std::vector<double>(3 * g.size(), 0.0));
    CHECK(oracle::max_abs(quadratic_variation(zero, config({1.0}, 4)).samples_at(1.0)) == 0.0);
}

TEST_CASE("quadratic covariation examples") {
    const auto& b = main_batch();
    const auto cfg = config({0.5, 1.0});
    CHECK(oracle::max_abs(quadratic_covariation(ScalarFunction::constant(3.0), b, cfg).samples_at(1.0)) == 0.0);
    CHECK(oracle::max_abs(quadratic_covariation(StepFunction({-10.0, 10.0}, {2.0}), b, cfg).samples_at(1.0)) == 0.0);
    const auto qv = quadratic_variation(b, cfg);
    const auto jid = quadratic_covariation(kIdentity, b, cfg);
    for (double t : {0.5, 1.0}) CHECK(max_abs_diff(jid.samples_at(t), qv.samples_at(t)) == 0.0);
}

TEST_CASE("backward minus forward equals J per path") {
    const auto& b = main_batch();
    const auto cfg = config({0.25, 1.0});
    const StepFunction ind = StepFunction::indicator(-0.2, 0.4);
    const StepFunction many({-1.0, -0.3, 0.0, 0.2, 0.9}, {0.5, -2.0, 1.5, 3.0});
    for (const auto& f : {ind, many}) {
        const auto fw = forward_integral(f, b, cfg), bw = backward_integral(f, b, cfg), j = quadratic_covariation(f, b, cfg);
        for (double t : cfg.eval_times) {
            const auto& J = j.samples_at(t);
            for (std::size_t k = 0; k < J.size(); ++k) {
                CHECK(bw.samples_at(t)[k] - fw.samples_at(t)[k] == doctest::Approx(J[k]).epsilon(1e-10).scale(1.0));
            }
        }
    }
    const auto fw = forward_integral(kSquare, b, cfg), bw = backward_integral(kSquare, b, cfg), j = quadratic_covariation(kSquare, b, cfg);
    for (std::size_t k = 0; k < b.n_paths(); ++k) {
        CHECK(bw.samples_at(1.0)[k] - fw.samples_at(1.0)[k] == doctest::Approx(j.samples_at(1.0)[k]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("J is linear in the integrand") {
    const auto& b = main_batch();
    const auto cfg = config({1.0});
    const StepFunction f({-1.0, 0.0, 1.0}, {1.0, -0.5});
    const StepFunction g({-0.5, 0.5}, {2.0});
    const auto jf = quadratic_covariation(f, b, cfg).samples_at(1.0);
    const auto jg = quadratic_covariation(g, b, cfg).samples_at(1.0);
    const auto jh = quadratic_covariation(f.linear_combination(2.0, g, -3.0), b, cfg).samples_at(1.0);
    for (std::size_t k = 0; k < jf.size(); ++k) CHECK(jh[k] == doctest::Approx(2.0 * jf[k] - 3.0 * jg[k]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("forward integral examples") {
    const auto& b = main_batch();
    const std::size_t m = 8;
    const auto cfg = config({0.5, 1.0}, m);
    const auto one = forward_integral(ScalarFunction::constant(1.0), b, cfg);
    for (double t : cfg.eval_times) {
        const std::size_t idx = b.grid().index_of(t);
        for (std::size_t k = 0; k < b.n_paths(); ++k) {
            const auto p = b.path(k);
            double tail = 0.0, head = 0.0, osc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                tail += p[idx + i];
                head += p[i];
                osc = std::max(osc, std::abs(p[idx + i] - p[idx]) + std::abs(p[i]));
            }
            const double v = one.samples_at(t)[k];
            CHECK(v == doctest::Approx((tail - head) / static_cast<double>(m)).epsilon(1e-12).scale(1.0));
            CHECK(std::abs(v - p[idx]) <= osc + 1e-12);
        }
    }
    CHECK(oracle::max_abs(forward_integral(ScalarFunction::constant(0.0), b, cfg).samples_at(1.0)) == 0.0);

    const auto id = forward_integral(kIdentity, b, cfg).at(1.0);
    std::vector<double> target(b.n_paths());
    for (std::size_t k = 0; k < target.size(); ++k) {
        const double bt = b.path(k)[1024];
        target[k] = 0.5 * (bt * bt - std::cbrt(2.0));
    }
    CHECK(std::abs(id.mean - oracle::mean(target)) <= std::max(0.05 * std::cbrt(2.0) / 2.0, 3.0 * id.std_error));
}

TEST_CASE("backward integral examples") {
    const auto& b = main_batch();
    const auto cfg = config({1.0});
    CHECK(max_abs_diff(backward_integral(ScalarFunction::constant(1.0), b, cfg).samples_at(1.0),
                       forward_integral(ScalarFunction::constant(1.0), b, cfg).samples_at(1.0)) == 0.0);
    const auto bw = backward_integral(kIdentity, b, cfg).samples_at(1.0);
    const auto fw = forward_integral(kIdentity, b, cfg).samples_at(1.0);
    const auto qv = quadratic_variation(b, cfg).samples_at(1.0);
    for (std::size_t k = 0; k < bw.size(); ++k) CHECK(bw[k] == doctest::Approx(fw[k] + qv[k]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("Skorohod integral examples") {
    const auto brown = sample_paths(kBrownian, TimeGrid(1.0, 256, 8), 50, 4);
    const auto cfg = config({1.0});
    CHECK(max_abs_diff(skorohod_integral(kSquare, brown, cfg).samples_at(1.0),
                       forward_integral(kSquare, brown, cfg).samples_at(1.0)) == 0.0);
    const auto& b = main_batch();
    CHECK(max_abs_diff(skorohod_integral(ScalarFunction::constant(2.0), b, cfg).samples_at(1.0),
                       forward_integral(ScalarFunction::constant(2.0), b, cfg).samples_at(1.0)) == 0.0);

    const auto sk = skorohod_integral(kIdentity, b, cfg).samples_at(1.0);
    std::vector<double> gap(sk.size());
    for (std::size_t k = 0; k < gap.size(); ++k) gap[k] = 0.5 * b.path(k)[1024] * b.path(k)[1024] - sk[k];
    CHECK(std::abs(oracle::mean(gap) - 0.5) <= std::max(0.05 * 0.5, 3.0 * oracle::std_error(gap)));

    const auto unconstrained = sample_paths(ModelParams::unconstrained(0.75, 0.7), TimeGrid(1.0, 64, 8), 3, 1);
    CHECK_THROWS_AS(skorohod_integral(kIdentity, unconstrained, cfg), DomainError);
}

TEST_CASE("smooth reference examples") {
    const auto& b = main_batch();
    const std::vector<double> times{0.5, 1.0};
    const auto id = smooth_reference(kIdentity, b, times);
    for (double t : times) {
        for (double v : id.samples_at(t)) CHECK(v == doctest::Approx(std::cbrt(2.0) * t).epsilon(1e-12));
    }
    CHECK(oracle::max_abs(smooth_reference(ScalarFunction::constant(4.0), b, times).samples_at(1.0)) == 0.0);
    const auto sq = smooth_reference(kSquare, b, times).at(1.0);
    CHECK(std::abs(sq.mean) <= 3.0 * sq.std_error);
    CHECK_THROWS_AS(smooth_reference(ScalarFunction::rough([](double x) { return std::abs(x); }), b, times), DomainError);
}

TEST_CASE("Ito residual examples") {
    const auto& b = main_batch();
    const std::size_t m = 8;
    const auto cfg = config({1.0}, m);
    const double c = 1.7;
    const auto lin = ito_residual(ScalarFunction::c1([c](double x) { return c * x; }, [c](double) { return c; }),
                                  ScalarFunction::constant(c), b, cfg, ItoMode::forward);
    for (std::size_t k = 0; k < b.n_paths(); ++k) {
        const auto p = b.path(k);
        double osc = 0.0;
        for (std::size_t i = 0; i < m; ++i) osc = std::max(osc, std::abs(p[1024 + i] - p[1024]) + std::abs(p[i]));
        CHECK(std::abs(lin.samples_at(1.0)[k]) <= c * osc + 1e-12);
    }

    const auto fwd = ito_residual(kSquare, kTwiceX, b, cfg, ItoMode::forward);
    const auto sko = ito_residual(kSquare, kTwiceX, b, cfg, ItoMode::skorohod);
    CHECK(fwd.label == "ito_residual_forward");
    CHECK(sko.label == "ito_residual_skorohod");
    for (std::size_t k = 0; k < b.n_paths(); ++k) {
        CHECK(fwd.samples_at(1.0)[k] == doctest::Approx(sko.samples_at(1.0)[k]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("Ito residual for F = x^2 at the reference resolution") {
    const std::size_t m = 16;
    const auto b = sample_paths(kMain, TimeGrid(1.0, 2048, m), 500, 12345);
    const auto r = ito_residual(kSquare, kTwiceX, b, config({1.0}, m), ItoMode::forward);
    // Per path the residual is B_t^2 minus the epsilon-window averages of B^2.
    for (std::size_t k = 0; k < b.n_paths(); ++k) {
        const auto p = b.path(k);
        double tail = 0.0, head = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            tail += p[2048 + i] * p[2048 + i];
            head += p[i] * p[i];
        }
        const double expected = p[2048] * p[2048] - (tail - head) / static_cast<double>(m);
        CHECK(r.samples_at(1.0)[k] == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
    }
    CHECK(std::abs(r.at(1.0).mean) <= std::max(0.05, 3.0 * r.at(1.0).std_error));
}

TEST_CASE("Ito residual with a step integrand: abs value via sign") {
    const auto& b = main_batch();
    const auto cfg = config({1.0});
    const double a = 0.25;
    const auto F = ScalarFunction::rough([a](double x) { return std::abs(x - a); });
    const StepFunction sign({-50.0, a, 50.0}, {-1.0, 1.0});
    const auto r = ito_residual(F, sign, b, cfg, ItoMode::skorohod).at(1.0);
    std::vector<double> absF(b.n_paths());
    for (std::size_t k = 0; k < absF.size(); ++k) absF[k] = std::abs(b.path(k)[1024] - a);
    CHECK(std::abs(r.mean) <= std::max(0.05 * oracle::mean(absF), 3.0 * r.std_error));
}

TEST_CASE("L2 bound for a bounded integrand grows like t^2 at most") {
    const auto& b = main_batch();
    const auto cfg = config({0.5, 1.0});
    const auto j = quadratic_covariation(StepFunction::indicator(0.0, 1.0), b, cfg);
    auto second_moment = [&](double t) {
        double s = 0.0;
        for (double v : j.samples_at(t)) s += v * v;
        return s / static_cast<double>(b.n_paths());
    };
    const double C = second_moment(0.5) / 0.25;
    CHECK(second_moment(1.0) <= 4.0 * C * 1.0);
}

TEST_CASE("Brownian oracle") {
    const auto brown = sample_paths(kBrownian, TimeGrid(1.0, 1024, 8), 400, 77);
    const auto cfg = config({1.0});
    const auto r = ito_residual(kSquare, kTwiceX, brown, cfg, ItoMode::forward).at(1.0);
    CHECK(std::abs(r.mean) <= 3.0 * r.std_error);
    const auto sq = ito_residual(kSquare, kTwiceX, brown, cfg, ItoMode::skorohod).at(1.0);
    CHECK(sq.mean == doctest::Approx(r.mean).epsilon(1e-10));
}

TEST_CASE("estimates do not depend on the worker count") {
    const auto& b = main_batch();
    const auto cfg = config({1.0});
    setenv("BIFBM_THREADS", "1", 1);
    const auto a = quadratic_covariation(kSquare, b, cfg).samples_at(1.0);
    setenv("BIFBM_THREADS", "3", 1);
    const auto c = quadratic_covariation(kSquare, b, cfg).samples_at(1.0);
    unsetenv("BIFBM_THREADS");
    CHECK(a == c);
}

}
