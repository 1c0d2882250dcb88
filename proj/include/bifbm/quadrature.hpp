#pragma once

#include <functional>

namespace bifbm::quad {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 1e-300;
    int max_depth = 50;
};

// Adaptive Simpson on [a, b]. The stopping rule targets
// max(rel_tol * |I|, abs_tol), with |I| taken from a 16-panel pilot estimate.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const Options& opts = {});

}  // namespace bifbm::quad
