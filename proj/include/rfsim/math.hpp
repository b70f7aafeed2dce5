#pragma once

#include <Eigen/Dense>

namespace rfsim {

// exp(x^2) * erfc(x) for x >= 0, usable where the two factors would
// overflow/underflow separately.
double erfcx(double x);

struct QuadratureRule {
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd weights;
};

// Nodes/weights for integrals against exp(-x^2) on the real line
// (physicists' convention: sum_i w_i f(x_i) ~ integral e^{-x^2} f(x) dx).
// Computed by Golub-Welsch from the Hermite recurrence; cached per n.
const QuadratureRule& gauss_hermite(int n);

// E[f(Z)] with Z ~ N(mean, sigma^2), evaluated on a Gauss-Hermite rule.
template <typename F>
double gauss_hermite_mean(const QuadratureRule& rule, double mean, double sigma, F&& f) {
    constexpr double inv_sqrt_pi = 0.56418958354775628695;
    const double s = 1.4142135623730951 * sigma;
    double acc = 0.0;
    for (int i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mean + s * rule.nodes[i]);
    return acc * inv_sqrt_pi;
}

}  // namespace rfsim
