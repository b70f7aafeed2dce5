#include "rfsim/math.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace rfsim {

double erfcx(double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("erfcx: requires x >= 0");
    if (x < 12.0) {
        // exp(x^2) stays below ~3e62 here and erfc(x) above ~1e-64: the direct
        // product is safe and accurate.
        return std::exp(x * x) * std::erfc(x);
    }
    // Laplace continued fraction, truncated from below; converges fast for
    // large argument.
    double cf = 0.0;
    for (int k = 20; k >= 1; --k) cf = (0.5 * k) / (x + cf);
    constexpr double inv_sqrt_pi = 0.56418958354775628695;
    return inv_sqrt_pi / (x + cf);
}

const QuadratureRule& gauss_hermite(int n) {
    if (n < 2) throw std::invalid_argument("gauss_hermite: need n >= 2");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    // Jacobi matrix for Hermite polynomials: zero diagonal, off-diagonal
    // beta_k = sqrt(k/2). Eigenvalues are the nodes; weights follow from the
    // first component of each eigenvector times mu0 = sqrt(pi).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(0.5 * k);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("gauss_hermite: eigen decomposition failed");

    QuadratureRule rule;
    rule.nodes = es.eigenvalues().array();
    const double sqrt_pi = 1.7724538509055160273;
    rule.weights = sqrt_pi * es.eigenvectors().row(0).array().square();
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace rfsim
