#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace rfsim {

struct Dataset1D {
    Eigen::ArrayXd x;
    Eigen::ArrayXd y;
    Eigen::ArrayXd y_err;  // optional: empty, or one entry per point
    std::string x_unit;    // informational labels carried into reports
    std::string y_unit;

    bool has_errors() const { return y_err.size() == x.size() && x.size() > 0; }
    // Throws if sizes disagree, values are non-finite, or fewer than
    // min_points samples are present.
    void validate(int min_points) const;
};

struct FitResult {
    std::vector<std::string> param_names;  // one label per parameter
    Eigen::VectorXd params;
    Eigen::VectorXd errors;  // +inf where the curvature matrix is not usable
    double chi2 = std::numeric_limits<double>::quiet_NaN();
    double chi2_reduced = std::numeric_limits<double>::quiet_NaN();
    Eigen::ArrayXd residuals;  // y - model(params), in data order (fits only)
    int n_iterations = 0;
    bool converged = false;
};

struct MinimizeOptions {
    int max_iterations = 10000;
    double tolerance = 1e-9;    // relative simplex diameter at which to stop
    int n_starts = 3;           // deterministic restarts around the initial guess
    double initial_step = 0.05; // relative size of the starting simplex
};

// Bounded Nelder-Mead. x0 must lie inside [lower, upper]; proposed points are
// clipped into the box. The objective must stay finite inside the box; a
// non-finite value throws. Parameter errors assume the objective is a sum of
// squared standardized residuals: covariance = 2 * inverse(Hessian),
// estimated by central differences at the optimum.
FitResult minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                   const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper, const MinimizeOptions& options = {});

// Model y = amplitude * exp(-x / tau) + baseline. Params: amplitude, tau,
// baseline. Without y_err, counts-like weights sigma_i = sqrt(max(y_i, floor))
// with floor = 1e-4 * max(y) are used.
FitResult fit_exponential(const Dataset1D& data);

// Model y = r_max * sin^2((pi/2) * sqrt(P / power_pi)). Params: r_max,
// power_pi. Unweighted when y_err is absent.
FitResult fit_rabi(const Dataset1D& data);

// Model y = amplitude * voigt(x - center; fwhm_l + instrument_fwhm_l, fwhm_g)
// + baseline, with a unit-area profile. Params: amplitude, center, fwhm_l,
// fwhm_g, baseline; fitted fwhm_l and fwhm_g exclude the instrument part.
// Counts-like weights when y_err is absent.
FitResult fit_voigt(const Dataset1D& data, double instrument_fwhm_l = 0.0);

// Model y = amplitude * lorentzian(x - center; fwhm + instrument_fwhm_l) +
// baseline. Params: amplitude, center, fwhm, baseline. Counts-like weights
// when y_err is absent.
FitResult fit_lorentzian(const Dataset1D& data, double instrument_fwhm_l = 0.0);

// Model y = v_inf + (v0 - v_inf) * exp(-x / tau_d). Params: v_inf, v0, tau_d.
// Unweighted when y_err is absent.
FitResult fit_visibility_decay(const Dataset1D& data);

}  // namespace rfsim
