#include "rfsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rfsim/spectra.hpp"

namespace rfsim {

namespace {

using Eigen::ArrayXd;
using Eigen::VectorXd;

VectorXd clip(VectorXd x, const VectorXd& lo, const VectorXd& hi) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

double checked_eval(const std::function<double(const VectorXd&)>& f, const VectorXd& x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw std::runtime_error("minimize: objective value is not finite");
    return v;
}

struct NmOutcome {
    VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

NmOutcome nelder_mead(const std::function<double(const VectorXd&)>& f, const VectorXd& start,
                      const VectorXd& lo, const VectorXd& hi, const VectorXd& steps0,
                      const MinimizeOptions& opt) {
    const int n = static_cast<int>(start.size());
    std::vector<VectorXd> v(static_cast<std::size_t>(n) + 1);
    std::vector<double> fv(static_cast<std::size_t>(n) + 1);
    v[0] = clip(start, lo, hi);
    for (int i = 0; i < n; ++i) {
        VectorXd p = v[0];
        if (p[i] + steps0[i] <= hi[i] || p[i] - steps0[i] < lo[i])
            p[i] = std::min(p[i] + steps0[i], hi[i]);
        else
            p[i] -= steps0[i];
        v[static_cast<std::size_t>(i) + 1] = p;
    }
    for (std::size_t j = 0; j < v.size(); ++j) fv[j] = checked_eval(f, v[j]);

    std::vector<int> order(v.size());
    NmOutcome out;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = order.front();
        const int worst = order.back();
        const int second = order[order.size() - 2];

        bool small = true;
        for (std::size_t j = 0; j < v.size() && small; ++j)
            for (int i = 0; i < n && small; ++i) {
                const double scale = std::max(std::abs(v[best][i]), steps0[i]);
                if (std::abs(v[j][i] - v[best][i]) > opt.tolerance * scale) small = false;
            }
        if (small) {
            out.converged = true;
            break;
        }

        VectorXd centroid = VectorXd::Zero(n);
        for (std::size_t j = 0; j < order.size(); ++j)
            if (static_cast<int>(order[j]) != worst) centroid += v[order[j]];
        centroid /= static_cast<double>(n);

        const VectorXd xr = clip(centroid + (centroid - v[worst]), lo, hi);
        const double fr = checked_eval(f, xr);
        if (fr < fv[best]) {
            const VectorXd xe = clip(centroid + 2.0 * (centroid - v[worst]), lo, hi);
            const double fe = checked_eval(f, xe);
            if (fe < fr) {
                v[worst] = xe;
                fv[worst] = fe;
            } else {
                v[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            v[worst] = xr;
            fv[worst] = fr;
        } else {
            const VectorXd xc = fr < fv[worst]
                                    ? clip(centroid + 0.5 * (xr - centroid), lo, hi)
                                    : clip(centroid + 0.5 * (v[worst] - centroid), lo, hi);
            const double fc = checked_eval(f, xc);
            if (fc < std::min(fr, fv[worst])) {
                v[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t j = 0; j < v.size(); ++j) {
                    if (static_cast<int>(j) == best) continue;
                    v[j] = clip(v[best] + 0.5 * (v[j] - v[best]), lo, hi);
                    fv[j] = checked_eval(f, v[j]);
                }
            }
        }
    }

    int best = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (fv[j] < fv[best]) best = static_cast<int>(j);
    out.x = v[best];
    out.f = fv[best];
    out.iterations = iter;
    return out;
}

VectorXd initial_steps(const VectorXd& x0, const VectorXd& lo, const VectorXd& hi,
                       const MinimizeOptions& opt) {
    VectorXd steps(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
        double base = std::abs(x0[i]);
        if (base == 0.0) {
            const double width = hi[i] - lo[i];
            base = std::isfinite(width) ? 0.1 * width : 1.0;
            if (base == 0.0) base = 1.0;
        }
        steps[i] = opt.initial_step * base;
    }
    return steps;
}

VectorXd curvature_errors(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                          const VectorXd& lo, const VectorXd& hi, const VectorXd& steps0) {
    const int n = static_cast<int>(x.size());
    const double inf = std::numeric_limits<double>::infinity();
    VectorXd h(n);
    VectorXd center = x;
    for (int i = 0; i < n; ++i) {
        // Step large enough that the objective change clears double-precision
        // noise even when the optimum sits near zero in this coordinate.
        h[i] = 1e-4 * std::max(std::abs(x[i]), steps0[i]);
        if (hi[i] - lo[i] < 4.0 * h[i]) return VectorXd::Constant(n, inf);
        center[i] = std::clamp(center[i], lo[i] + h[i], hi[i] - h[i]);
    }
    // Work in step-scaled coordinates (u_i = (x_i - c_i) / h_i): parameters can
    // differ by many orders of magnitude, and the raw Hessian would then be too
    // ill-conditioned to invert in double precision even when the scaled one is
    // perfectly benign.
    Eigen::MatrixXd hess(n, n);
    const double f0 = f(center);
    for (int i = 0; i < n; ++i) {
        VectorXd p = center, m = center;
        p[i] += h[i];
        m[i] -= h[i];
        hess(i, i) = f(p) - 2.0 * f0 + f(m);
        for (int j = i + 1; j < n; ++j) {
            VectorXd pp = center, pm = center, mp = center, mm = center;
            pp[i] += h[i];
            pp[j] += h[j];
            pm[i] += h[i];
            pm[j] -= h[j];
            mp[i] -= h[i];
            mp[j] += h[j];
            mm[i] -= h[i];
            mm[j] -= h[j];
            hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / 4.0;
        }
    }
    if (!hess.allFinite()) return VectorXd::Constant(n, inf);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(hess);
    if (!lu.isInvertible()) return VectorXd::Constant(n, inf);
    const Eigen::MatrixXd cov_scaled = 2.0 * lu.inverse();
    VectorXd err(n);
    for (int i = 0; i < n; ++i)
        err[i] = cov_scaled(i, i) > 0.0 ? h[i] * std::sqrt(cov_scaled(i, i)) : inf;
    return err;
}

ArrayXd sigma_vector(const Dataset1D& d, bool counts_like) {
    if (d.has_errors()) {
        if ((d.y_err <= 0.0).any())
            throw std::invalid_argument("fit: y_err entries must be > 0");
        return d.y_err;
    }
    if (!counts_like) return ArrayXd::Ones(d.x.size());
    const double ymax = d.y.maxCoeff();
    if (!(ymax > 0.0)) return ArrayXd::Ones(d.x.size());
    return d.y.max(1e-4 * ymax).sqrt();
}

using ArrayModel = std::function<ArrayXd(const VectorXd&, const ArrayXd&)>;

FitResult run_fit(const ArrayModel& model, std::vector<std::string> names, const Dataset1D& d,
                  const ArrayXd& sigma, const VectorXd& x0, const VectorXd& lo,
                  const VectorXd& hi) {
    auto objective = [&](const VectorXd& p) -> double {
        const ArrayXd r = (d.y - model(p, d.x)) / sigma;
        return (r * r).sum();
    };
    FitResult res = minimize(objective, x0, lo, hi);
    const int dof = std::max<int>(1, static_cast<int>(d.x.size()) - static_cast<int>(x0.size()));
    res.chi2_reduced = res.chi2 / dof;
    // Placeholder weights carry no scale information, so the covariance is
    // normalized as if the model matched the scatter exactly (the usual
    // convention when no per-point errors are supplied). Infinite errors mark
    // unidentifiable parameters and must survive the rescaling untouched.
    if (!d.has_errors()) {
        const double scale = std::sqrt(res.chi2_reduced);
        for (Eigen::Index i = 0; i < res.errors.size(); ++i)
            if (std::isfinite(res.errors[i])) res.errors[i] *= scale;
    }
    res.param_names = std::move(names);
    res.residuals = d.y - model(res.params, d.x);
    return res;
}

}  // namespace

void Dataset1D::validate(int min_points) const {
    if (x.size() != y.size()) throw std::invalid_argument("dataset: x and y sizes differ");
    if (x.size() < min_points)
        throw std::invalid_argument("dataset: not enough points for this model");
    if (!x.allFinite() || !y.allFinite())
        throw std::invalid_argument("dataset: x and y must be finite");
    if (y_err.size() != 0 && y_err.size() != x.size())
        throw std::invalid_argument("dataset: y_err must be empty or match x");
    if (y_err.size() != 0 && !y_err.allFinite())
        throw std::invalid_argument("dataset: y_err must be finite");
}

FitResult minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                   const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper, const MinimizeOptions& options) {
    if (x0.size() == 0) throw std::invalid_argument("minimize: empty parameter vector");
    if (lower.size() != x0.size() || upper.size() != x0.size())
        throw std::invalid_argument("minimize: bounds must match parameter count");
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
        if (!(lower[i] <= upper[i]))
            throw std::invalid_argument("minimize: lower bound exceeds upper bound");
        if (!(x0[i] >= lower[i] && x0[i] <= upper[i]))
            throw std::invalid_argument("minimize: initial point outside bounds");
    }
    if (options.n_starts < 1 || options.max_iterations < 1)
        throw std::invalid_argument("minimize: options out of range");

    const VectorXd steps0 = initial_steps(x0, lower, upper, options);
    NmOutcome best;
    bool have = false;
    int total_iterations = 0;
    for (int s = 0; s < options.n_starts; ++s) {
        VectorXd start = x0;
        if (s > 0) {
            const double factor = (s % 2 == 1) ? 1.0 + 0.3 * ((s + 1) / 2)
                                               : 1.0 - 0.3 * (s / 2) / (1.0 + 0.3 * (s / 2));
            for (Eigen::Index i = 0; i < start.size(); ++i) {
                if (start[i] != 0.0)
                    start[i] *= factor;
                else
                    start[i] += (s % 2 == 1 ? 1.0 : -1.0) * 6.0 * steps0[i];
            }
        }
        NmOutcome run = nelder_mead(objective, start, lower, upper, steps0, options);
        total_iterations += run.iterations;
        if (!have || run.f < best.f) {
            best = run;
            have = true;
        }
    }

    FitResult res;
    res.params = best.x;
    res.chi2 = best.f;
    res.n_iterations = total_iterations;
    res.converged = best.converged;
    res.errors = curvature_errors(objective, best.x, lower, upper, steps0);
    return res;
}

FitResult fit_exponential(const Dataset1D& data) {
    data.validate(4);
    const ArrayXd sigma = sigma_vector(data, true);
    const double ymax = data.y.maxCoeff();
    const double ymin = data.y.minCoeff();
    const double range = data.x.maxCoeff() - data.x.minCoeff();
    if (!(range > 0.0)) throw std::invalid_argument("fit_exponential: x has no spread");
    if (!(ymax > ymin)) throw std::invalid_argument("fit_exponential: y has no variation");

    const double b0 = ymin;
    const double a0 = ymax - ymin;
    // Log-slope guess over the clearly-above-baseline points, else range/3.
    double tau0 = range / 3.0;
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (Eigen::Index i = 0; i < data.x.size(); ++i) {
            const double dy = data.y[i] - b0;
            if (dy > 0.1 * a0) {
                const double ly = std::log(dy);
                sx += data.x[i];
                sy += ly;
                sxx += data.x[i] * data.x[i];
                sxy += data.x[i] * ly;
                ++m;
            }
        }
        const double det = m * sxx - sx * sx;
        if (m >= 2 && det > 0.0) {
            const double slope = (m * sxy - sx * sy) / det;
            if (slope < 0.0 && std::isfinite(slope)) tau0 = std::min(-1.0 / slope, 1e2 * range);
        }
    }

    VectorXd x0(3), lo(3), hi(3);
    lo << 0.0, 1e-6 * range, ymin - (ymax - ymin);
    hi << 10.0 * (ymax - ymin), 1e3 * range, ymax;
    x0 << a0, std::clamp(tau0, lo[1], hi[1]), b0;
    auto model = [](const VectorXd& p, const ArrayXd& x) -> ArrayXd {
        return p[0] * (-x / p[1]).exp() + p[2];
    };
    return run_fit(model, {"amplitude", "tau", "baseline"}, data, sigma, x0, lo, hi);
}

FitResult fit_rabi(const Dataset1D& data) {
    data.validate(3);
    if ((data.x < 0.0).any()) throw std::invalid_argument("fit_rabi: powers must be >= 0");
    const double xmax = data.x.maxCoeff();
    if (!(xmax > 0.0)) throw std::invalid_argument("fit_rabi: x has no spread");
    const ArrayXd sigma = sigma_vector(data, false);
    Eigen::Index peak = 0;
    data.y.maxCoeff(&peak);
    const double r0 = std::max(data.y.maxCoeff(), 1e-12);
    const double p0 = std::clamp(data.x[peak], 1e-3 * xmax, xmax);

    VectorXd x0(2), lo(2), hi(2);
    x0 << r0, p0;
    lo << 0.0, 1e-3 * xmax;
    hi << 2.0 * r0, 10.0 * xmax;
    auto model = [](const VectorXd& p, const ArrayXd& x) -> ArrayXd {
        return p[0] * ((0.5 * M_PI) * (x / p[1]).sqrt()).sin().square();
    };
    return run_fit(model, {"r_max", "power_pi"}, data, sigma, x0, lo, hi);
}

namespace {

// Rough full width at half maximum of (sorted-x) peaked data above baseline.
double data_width_guess(const ArrayXd& x, const ArrayXd& y) {
    Eigen::Index peak = 0;
    const double ymax = y.maxCoeff(&peak);
    const double base = y.minCoeff();
    const double half = base + 0.5 * (ymax - base);
    double left = x[0], right = x[x.size() - 1];
    for (Eigen::Index i = peak; i > 0; --i)
        if (y[i - 1] <= half) {
            const double t = (half - y[i - 1]) / (y[i] - y[i - 1]);
            left = x[i - 1] + t * (x[i] - x[i - 1]);
            break;
        }
    for (Eigen::Index i = peak; i + 1 < x.size(); ++i)
        if (y[i + 1] <= half) {
            const double t = (y[i] - half) / (y[i] - y[i + 1]);
            right = x[i] + t * (x[i + 1] - x[i]);
            break;
        }
    const double w = right - left;
    const double range = x[x.size() - 1] - x[0];
    return (w > 0.0 && w < range) ? w : 0.1 * range;
}

}  // namespace

FitResult fit_voigt(const Dataset1D& data, double instrument_fwhm_l) {
    data.validate(6);
    if (!(instrument_fwhm_l >= 0.0))
        throw std::invalid_argument("fit_voigt: instrument width must be >= 0");
    const ArrayXd sigma = sigma_vector(data, true);
    const double ymax = data.y.maxCoeff();
    const double ymin = data.y.minCoeff();
    if (!(ymax > ymin)) throw std::invalid_argument("fit_voigt: y has no variation");
    Eigen::Index peak = 0;
    data.y.maxCoeff(&peak);
    const double w = data_width_guess(data.x, data.y);

    const double l0 = std::max(0.5 * w - instrument_fwhm_l, 0.01 * w);
    const double g0 = 0.5 * w;
    const double height0 = voigt_profile(0.0, l0 + instrument_fwhm_l, g0);
    const double a0 = (ymax - ymin) / height0;

    VectorXd x0(5), lo(5), hi(5);
    x0 << a0, data.x[peak], l0, g0, ymin;
    lo << 0.0, data.x.minCoeff(), 0.0, (instrument_fwhm_l > 0.0 ? 0.0 : 1e-6 * w),
        ymin - (ymax - ymin);
    hi << 1e3 * a0, data.x.maxCoeff(), 10.0 * w, 10.0 * w, ymax;
    auto model = [instrument_fwhm_l](const VectorXd& p, const ArrayXd& x) -> ArrayXd {
        return p[0] * voigt_profile((x - p[1]).eval(), p[2] + instrument_fwhm_l, p[3]) + p[4];
    };
    return run_fit(model, {"amplitude", "center", "fwhm_l", "fwhm_g", "baseline"}, data, sigma,
                   x0, lo, hi);
}

FitResult fit_lorentzian(const Dataset1D& data, double instrument_fwhm_l) {
    data.validate(5);
    if (!(instrument_fwhm_l >= 0.0))
        throw std::invalid_argument("fit_lorentzian: instrument width must be >= 0");
    const ArrayXd sigma = sigma_vector(data, true);
    const double ymax = data.y.maxCoeff();
    const double ymin = data.y.minCoeff();
    if (!(ymax > ymin)) throw std::invalid_argument("fit_lorentzian: y has no variation");
    Eigen::Index peak = 0;
    data.y.maxCoeff(&peak);
    const double w = data_width_guess(data.x, data.y);

    const double f0 = std::max(w - instrument_fwhm_l, 0.01 * w);
    const double a0 = (ymax - ymin) / lorentzian(0.0, f0 + instrument_fwhm_l);

    VectorXd x0(4), lo(4), hi(4);
    x0 << a0, data.x[peak], f0, ymin;
    lo << 0.0, data.x.minCoeff(), (instrument_fwhm_l > 0.0 ? 0.0 : 1e-6 * w),
        ymin - (ymax - ymin);
    hi << 1e3 * a0, data.x.maxCoeff(), 10.0 * w, ymax;
    auto model = [instrument_fwhm_l](const VectorXd& p, const ArrayXd& x) -> ArrayXd {
        const double eff = p[2] + instrument_fwhm_l;
        const ArrayXd d = x - p[1];
        return p[0] * (eff / (2.0 * M_PI)) / (d.square() + 0.25 * eff * eff) + p[3];
    };
    return run_fit(model, {"amplitude", "center", "fwhm", "baseline"}, data, sigma, x0, lo, hi);
}

FitResult fit_visibility_decay(const Dataset1D& data) {
    data.validate(4);
    const ArrayXd sigma = sigma_vector(data, false);
    const double range = data.x.maxCoeff() - data.x.minCoeff();
    if (!(range > 0.0)) throw std::invalid_argument("fit_visibility_decay: x has no spread");
    Eigen::Index first = 0, last = 0;
    data.x.minCoeff(&first);
    data.x.maxCoeff(&last);

    VectorXd x0(3), lo(3), hi(3);
    lo << -0.5, -0.5, 1e-6 * range;
    hi << 1.5, 1.5, 1e3 * range;
    x0 << std::clamp(data.y[last], lo[0], hi[0]), std::clamp(data.y[first], lo[1], hi[1]),
        range / 3.0;
    auto model = [](const VectorXd& p, const ArrayXd& x) -> ArrayXd {
        return p[0] + (p[1] - p[0]) * (-x / p[2]).exp();
    };
    return run_fit(model, {"v_inf", "v0", "tau_d"}, data, sigma, x0, lo, hi);
}

}  // namespace rfsim
