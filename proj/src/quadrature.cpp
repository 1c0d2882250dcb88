#include "bifbm/quadrature.hpp"

#include <cmath>

namespace bifbm::quad {

namespace {

struct Panel {
    double a, m, b;
    double fa, fm, fb;
    double whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(const std::function<double(double)>& f, const Panel& p, double tol, int depth) {
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
    const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return refine(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
           refine(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const Options& opts) {
    if (a == b) return 0.0;

    constexpr int kPilot = 16;
    const double h = (b - a) / kPilot;
    double values[2 * kPilot + 1];
    for (int i = 0; i <= 2 * kPilot; ++i) values[i] = f(a + 0.5 * h * i);

    double pilot = 0.0;
    for (int i = 0; i < kPilot; ++i) {
        pilot += simpson(a + h * i, a + h * (i + 1), values[2 * i], values[2 * i + 1], values[2 * i + 2]);
    }
    const double tol = std::max(opts.rel_tol * std::abs(pilot), opts.abs_tol) / kPilot;

    double total = 0.0;
    for (int i = 0; i < kPilot; ++i) {
        const double pa = a + h * i;
        const double pb = (i + 1 == kPilot) ? b : a + h * (i + 1);
        const Panel panel{pa, 0.5 * (pa + pb), pb, values[2 * i], values[2 * i + 1], values[2 * i + 2],
                          simpson(pa, pb, values[2 * i], values[2 * i + 1], values[2 * i + 2])};
        total += refine(f, panel, tol, opts.max_depth);
    }
    return total;
}

}  // namespace bifbm::quad
