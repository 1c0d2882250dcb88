// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "bifbm/estimators.hpp"
#include "bifbm/harness.hpp"
#include "bifbm/kernel.hpp"
#include "bifbm/localtime.hpp"
#include "bifbm/sampler.hpp"

using namespace bifbm;
using harness::ExperimentConfig;
using harness::parse_config;
using harness::run_experiment;

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [failed]");
    }
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double mean_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s / static_cast<double>(v.size());
}

// Default profile: T = 1, n = 2048, epsilon = 16 dt, 500 paths, seed 12345.
ExperimentConfig profile(const std::string& experiment, const std::string& extra = "") {
    return parse_config("experiment = " + experiment + "\n" + extra);
}

EstimatorConfig estimator(std::size_t m, std::vector<double> times = {1.0}) {
    EstimatorConfig c;
    c.epsilon_steps = m;
    c.eval_times = std::move(times);
    return c;
}

const PathBatch& main_batch() {
    static const PathBatch b = [] {
        const auto cfg = profile("qv");
        return sample_paths(cfg.params(), cfg.grid(), cfg.paths, cfg.seed);
    }();
    return b;
}

bool close_relative(double a, double b, double scale) {
    return std::abs(a - b) <= 1e-10 * std::max({std::abs(a), std::abs(b), scale});
}

Outcome criterion_qv() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto rep = run_experiment(profile("qv"));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto& r = rep.find("quadratic_variation", 1.0);
    const double target = std::cbrt(2.0);
    o.require(std::abs(r.mean - target) <= 0.05 * target,
              fmt("mean %.5f vs %.5f (rel %.2f%%)", r.mean, target, 100.0 * std::abs(r.mean - target) / target));
    o.require(std::abs(r.mean - target) <= 3.0 * *r.std_error, fmt("within %.2f se", std::abs(r.mean - target) / *r.std_error));
    o.require(secs <= 300.0, fmt("runtime %.2fs", secs));
    return o;
}

Outcome criterion_brownian() {
    Outcome o;
    const ModelParams p(0.5, 1.0);
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
        for (int j = 0; j <= 40; ++j) {
            const double s = 0.1 * i, t = 0.1 * j;
            worst = std::max(worst, std::abs(covariance(p, s, t) - std::min(s, t)));
        }
    }
    o.require(worst <= 1e-12, fmt("max |R - min| %.2e", worst));

    const auto qv = run_experiment(profile("qv", "H = 0.5\nK = 1\n")).find("quadratic_variation", 1.0);
    o.require(std::abs(qv.mean - 1.0) <= 0.05 && std::abs(qv.mean - 1.0) <= 3.0 * *qv.std_error,
              fmt("[W,W]_1 %.5f (se %.5f)", qv.mean, *qv.std_error));

    const auto tanaka = run_experiment(profile("tanaka", "H = 0.5\nK = 1\nx = 0\n"));
    const auto& r = tanaka.find("tanaka_residual", 1.0);
    o.require(std::abs(r.mean) <= 0.05 * kSqrt2OverPi,
              fmt("Tanaka mean residual %.5f vs 5%% of %.5f", r.mean, kSqrt2OverPi));
    return o;
}

Outcome criterion_scans() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& p : {ModelParams(0.5, 1.0), ModelParams(0.75, 2.0 / 3.0), ModelParams::from_hurst(0.625)}) {
        const auto rep = lemma_scan(p, 10000, 12345);
        std::size_t explicit_checks = 0;
        for (const auto& c : rep.checks) explicit_checks += c.constant ? 1 : 0;
        o.require(rep.total_violations() == 0,
                  fmt("(H,K)=(%.3g,%.3g): %.0f violations", p.H(), p.K(), static_cast<double>(rep.total_violations())) +
                      " over " + std::to_string(explicit_checks) + " bounded checks");
    }
    const bool elementary = elementary_inequality_check(0.5, 2.0, 100000) &&
                            elementary_inequality_check(2.0 / 3.0, 1.5, 100000) &&
                            elementary_inequality_check(0.8, 1.25, 100000) && elementary_inequality_check(1.0, 1.0, 100000);
    o.require(elementary, "power inequalities on 1e5 points");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs <= 60.0, fmt("runtime %.2fs", secs));
    return o;
}

Outcome criterion_smooth_covariation() {
    Outcome o;
    const auto rep = run_experiment(profile("qc", "function = square\n"));
    const auto& d = rep.find("covariation_minus_reference", 1.0);
    o.require(*d.pass(), fmt("J - reference %.5f (tol %.5f, se %.5f)", d.mean, *d.tolerance, *d.std_error));
    return o;
}

Outcome criterion_ito() {
    Outcome o;
    const auto rep = run_experiment(profile("ito", "function = square\n"));
    const auto& r = rep.find("ito_residual_forward", 1.0);
    o.require(std::abs(r.mean) <= 0.05, fmt("mean residual %.5f (se %.5f) vs 0.05", r.mean, *r.std_error));

    struct Rung {
        std::size_t n, m;
    };
    std::vector<double> values, ses;
    std::string rungs;
    for (const Rung rung : {Rung{512, 8}, Rung{1024, 8}, Rung{2048, 16}}) {
        const auto cfg = profile("ito", "function = square\nsteps = " + std::to_string(rung.n) +
                                            "\nepsilon_steps = " + std::to_string(rung.m) + "\n");
        const auto& abs_row = run_experiment(cfg).find("ito_residual_forward_abs", 1.0);
        values.push_back(abs_row.mean);
        ses.push_back(*abs_row.std_error);
        rungs += fmt(" %.4f (se %.4f)", abs_row.mean, *abs_row.std_error);
    }
    o.require(harness::decreasing_ladder(values, ses), "mean |residual| ladder 512/8, 1024/8, 2048/16:" + rungs);
    return o;
}

Outcome criterion_bouleau_yor() {
    Outcome o;
    const auto rep = run_experiment(profile("bouleau-yor", "breakpoints = -1, 1\nlevels = 1\n"));
    const auto& by = rep.find("bouleau_yor_residual", 1.0);
    o.require(*by.pass(), fmt("J + 2^{1-K} int f dL: %.5f (tol %.5f)", by.mean, *by.tolerance));
    const auto& lt = rep.find("local_time_sum_residual", 1.0);
    o.require(*lt.pass(), fmt("int f dL + 2^{K-1} J: %.5f (tol %.5f)", lt.mean, *lt.tolerance));
    return o;
}

Outcome criterion_local_time() {
    Outcome o;
    for (const auto& extra : {std::string("H = 0.5\nK = 1\n"), std::string("H = 0.75\nK = 2/3\n")}) {
        const auto cfg = profile("tanaka", extra + "x = 0\n");
        const auto& L = run_experiment(cfg).find("local_time", 1.0);
        o.require(std::abs(L.mean - kSqrt2OverPi) <= 0.05 * kSqrt2OverPi,
                  fmt("(H,K)=(%.3g,%.3g) L(0,1) %.5f", cfg.H, cfg.K, L.mean) +
                      fmt(" (rel %.2f%%)", 100.0 * std::abs(L.mean - kSqrt2OverPi) / kSqrt2OverPi));
    }
    return o;
}

Outcome criterion_occupation() {
    Outcome o;
    const auto rep = run_experiment(profile("occupation", "function = gaussian-bump\n"));
    const auto& unit = rep.find("occupation_gap_unit", 1.0);
    const auto& bump = rep.find("occupation_gap", 1.0);
    o.require(unit.mean <= 0.02, fmt("psi = 1 gap %.4f%%", 100.0 * unit.mean));
    o.require(bump.mean <= 0.05, fmt("bump gap %.4f%%", 100.0 * bump.mean));
    return o;
}

Outcome criterion_exact_identities() {
    Outcome o;
    const auto& b = main_batch();
    const auto cfg = estimator(16, {0.5, 1.0});
    const ScalarFunction square =
        ScalarFunction::c2([](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; });
    const StepFunction f({-1.0, -0.25, 0.5, 1.5}, {1.0, -2.0, 0.75});
    const StepFunction g = StepFunction::indicator(-0.5, 0.5);

    std::size_t bad = 0, total = 0;
    auto compare = [&](const std::vector<double>& lhs, const std::vector<double>& rhs, const std::vector<double>& scale) {
        for (std::size_t k = 0; k < lhs.size(); ++k) {
            ++total;
            if (!close_relative(lhs[k], rhs[k], scale[k])) ++bad;
        }
    };
    auto identity_for = [&](const auto& fn) {
        const auto fw = forward_integral(fn, b, cfg), bw = backward_integral(fn, b, cfg), j = quadratic_covariation(fn, b, cfg);
        for (double t : cfg.eval_times) {
            const auto& F = fw.samples_at(t);
            const auto& B = bw.samples_at(t);
            std::vector<double> diff(F.size()), scale(F.size());
            for (std::size_t k = 0; k < F.size(); ++k) {
                diff[k] = B[k] - F[k];
                scale[k] = std::max(std::abs(B[k]), std::abs(F[k]));
            }
            compare(diff, j.samples_at(t), scale);
        }
    };
    identity_for(f);
    identity_for(g);
    identity_for(square);
    o.require(bad == 0, "backward - forward = J on " + std::to_string(total) + " values");

    bad = total = 0;
    const auto jf = quadratic_covariation(f, b, cfg).samples_at(1.0);
    const auto jg = quadratic_covariation(g, b, cfg).samples_at(1.0);
    const auto jh = quadratic_covariation(f.linear_combination(2.0, g, -3.0), b, cfg).samples_at(1.0);
    std::vector<double> combo(jf.size()), scale(jf.size());
    for (std::size_t k = 0; k < jf.size(); ++k) {
        combo[k] = 2.0 * jf[k] - 3.0 * jg[k];
        scale[k] = 2.0 * std::abs(jf[k]) + 3.0 * std::abs(jg[k]);
    }
    compare(jh, combo, scale);
    o.require(bad == 0, "linearity of J on " + std::to_string(total) + " paths");

    const auto brown = sample_paths(ModelParams(0.5, 1.0), TimeGrid(1.0, 2048, 16), 100, 12345);
    const auto sk = skorohod_integral(f, brown, cfg).samples_at(1.0);
    const auto fw = forward_integral(f, brown, cfg).samples_at(1.0);
    o.require(sk == fw, "Skorohod = forward at K = 1");

    bool identical = true;
    for (const char* name : {"qv", "bouleau-yor", "mollify-ladder"}) {
        const auto c = profile(name, "paths = 100\n");
        const auto r1 = run_experiment(c), r2 = run_experiment(c);
        identical = identical && harness::emit_csv(r1) == harness::emit_csv(r2) &&
                    harness::emit_json(r1, false) == harness::emit_json(r2, false);
    }
    o.require(identical, "byte-identical CSV and JSON reports");
    return o;
}

Outcome criterion_mollifier() {
    Outcome o;
    const auto rep = run_experiment(profile("mollify-ladder", "breakpoints = 0, 1\nlevels = 1\norders = 4, 16, 64\n"));
    std::string h, c;
    for (int n : {4, 16, 64}) {
        h += fmt(" %.4f", rep.find("hnorm_gap_n" + std::to_string(n)).mean);
        c += fmt(" %.4f", rep.find("covariation_gap_n" + std::to_string(n), 1.0).mean);
    }
    o.require(*rep.find("hnorm_gap_decreasing").pass(), "hnorm(f_n - f)" + h);
    o.require(*rep.find("covariation_gap_decreasing", 1.0).pass(), "mean |J(f_n) - J(f)|" + c);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"quadratic variation constant", criterion_qv},
        {"Brownian oracle", criterion_brownian},
        {"inequality scans", criterion_scans},
        {"smooth covariation identity", criterion_smooth_covariation},
        {"Ito formula", criterion_ito},
        {"Bouleau-Yor identity", criterion_bouleau_yor},
        {"local time expectation", criterion_local_time},
        {"occupation formula", criterion_occupation},
        {"exact discrete identities", criterion_exact_identities},
        {"mollifier ladder", criterion_mollifier},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %2zu %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
