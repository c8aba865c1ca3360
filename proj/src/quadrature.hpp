// Internal numerical helpers shared by the modules.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace hsv::detail {

/// Gauss-Legendre rule on [0, 1]: nodes and weights.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

const GaussRule& gauss_legendre(int n);

/// log(erfc(x)) without underflow for large positive x.
inline double log_erfc(double x) {
    if (x < 25.0) return std::log(std::erfc(x));
    const double x2 = x * x;
    // asymptotic series of erfcx
    const double s = 1.0 - 0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2);
    return -x2 - std::log(x * std::sqrt(M_PI)) + std::log(s);
}

}  // namespace hsv::detail
