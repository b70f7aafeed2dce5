#include "rfsim/spectra.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace rfsim {

namespace {

using Eigen::ArrayXd;

constexpr double kSqrt8Ln2 = 2.3548200450309493;  // fwhm of a unit-sigma Gaussian

double airy_value(double nu, double finesse, double fsr, double peak) {
    const double s = std::sin(M_PI * nu / fsr);
    const double c = 2.0 * finesse / M_PI;
    return peak / (1.0 + c * c * s * s);
}

// Discrete Gaussian smearing kernel: offsets j*h for j in [-K, K], weights
// renormalized to sum to 1. h resolves the narrower of the two widths so the
// sampled mixture is indistinguishable from the true convolution.
struct GaussKernel {
    double h = 0.0;
    ArrayXd weights;  // size 2K+1, index j+K
    int half() const { return (static_cast<int>(weights.size()) - 1) / 2; }
};

GaussKernel make_gauss_kernel(double fwhm_l, double fwhm_g) {
    GaussKernel k;
    const double sigma = fwhm_g / kSqrt8Ln2;
    k.h = std::min(fwhm_l, fwhm_g) / 50.0;
    const int half = static_cast<int>(std::ceil(8.0 * sigma / k.h));
    k.weights.resize(2 * half + 1);
    for (int j = -half; j <= half; ++j)
        k.weights[j + half] = std::exp(-0.5 * (j * k.h) * (j * k.h) / (sigma * sigma));
    k.weights /= k.weights.sum();
    return k;
}

void check_widths(double fwhm_l, double fwhm_g) {
    if (!std::isfinite(fwhm_l) || !std::isfinite(fwhm_g) || fwhm_l < 0.0 || fwhm_g < 0.0 ||
        fwhm_l + fwhm_g <= 0.0)
        throw std::invalid_argument("voigt: widths must be >= 0 and not both zero");
}

}  // namespace

Eigen::ArrayXd Spectrum::grid() const {
    ArrayXd idx = ArrayXd::LinSpaced(n(), 0.0, static_cast<double>(n() - 1));
    return nu_min + step * idx;
}

Spectrum Spectrum::centered(double span, double step) {
    if (!(step > 0.0) || !(span >= step))
        throw std::invalid_argument("Spectrum::centered: need span >= step > 0");
    const auto m = static_cast<int>(std::llround(span / step));
    Spectrum s;
    s.step = step;
    s.nu_min = -m * step;
    s.intensity = ArrayXd::Zero(2 * m + 1);
    return s;
}

std::vector<std::string> FabryPerotSpec::validate() const {
    std::vector<std::string> problems;
    if (!(std::isfinite(finesse) && finesse > 1.0))
        problems.emplace_back("finesse must be finite and > 1");
    if (!(std::isfinite(fsr) && fsr > 0.0)) problems.emplace_back("fsr must be finite and > 0");
    if (!(std::isfinite(peak_transmission) && peak_transmission > 0.0 &&
          peak_transmission <= 1.0))
        problems.emplace_back("peak_transmission must be in (0, 1]");
    return problems;
}

double lorentzian(double nu, double fwhm) {
    if (!(fwhm > 0.0)) throw std::invalid_argument("lorentzian: fwhm must be > 0");
    return (fwhm / (2.0 * M_PI)) / (nu * nu + 0.25 * fwhm * fwhm);
}

double gaussian(double nu, double fwhm) {
    if (!(fwhm > 0.0)) throw std::invalid_argument("gaussian: fwhm must be > 0");
    const double sigma = fwhm / kSqrt8Ln2;
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    return norm * std::exp(-0.5 * nu * nu / (sigma * sigma));
}

Eigen::ArrayXd voigt_profile(const Eigen::ArrayXd& nu, double fwhm_l, double fwhm_g) {
    check_widths(fwhm_l, fwhm_g);
    if (fwhm_g == 0.0) {
        const double c = fwhm_l / (2.0 * M_PI);
        return c / (nu.square() + 0.25 * fwhm_l * fwhm_l);
    }
    if (fwhm_l == 0.0) {
        const double sigma = fwhm_g / kSqrt8Ln2;
        const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
        return norm * (-0.5 * nu.square() / (sigma * sigma)).exp();
    }
    const GaussKernel k = make_gauss_kernel(fwhm_l, fwhm_g);
    const double c = fwhm_l / (2.0 * M_PI);
    const double q = 0.25 * fwhm_l * fwhm_l;
    ArrayXd out = ArrayXd::Zero(nu.size());
    const int half = k.half();
    for (int j = -half; j <= half; ++j)
        out += k.weights[j + half] * (c / ((nu - j * k.h).square() + q));
    return out;
}

double voigt_profile(double nu, double fwhm_l, double fwhm_g) {
    check_widths(fwhm_l, fwhm_g);
    if (fwhm_g == 0.0) return lorentzian(nu, fwhm_l);
    if (fwhm_l == 0.0) return gaussian(nu, fwhm_g);
    const GaussKernel k = make_gauss_kernel(fwhm_l, fwhm_g);
    const int half = k.half();
    double out = 0.0;
    for (int j = -half; j <= half; ++j)
        out += k.weights[j + half] * lorentzian(nu - j * k.h, fwhm_l);
    return out;
}

double fwhm_of_profile(const Eigen::ArrayXd& nu, const Eigen::ArrayXd& y) {
    if (nu.size() != y.size() || nu.size() < 3)
        throw std::invalid_argument("fwhm_of_profile: need matching arrays of >= 3 points");
    Eigen::Index peak = 0;
    const double ymax = y.maxCoeff(&peak);
    if (!(ymax > 0.0)) throw std::invalid_argument("fwhm_of_profile: peak must be > 0");
    const double half = 0.5 * ymax;
    double left = 0.0, right = 0.0;
    bool found_left = false, found_right = false;
    for (Eigen::Index i = peak; i > 0; --i)
        if (y[i - 1] <= half && y[i] > half) {
            const double t = (half - y[i - 1]) / (y[i] - y[i - 1]);
            left = nu[i - 1] + t * (nu[i] - nu[i - 1]);
            found_left = true;
            break;
        }
    for (Eigen::Index i = peak; i + 1 < nu.size(); ++i)
        if (y[i + 1] <= half && y[i] > half) {
            const double t = (y[i] - half) / (y[i] - y[i + 1]);
            right = nu[i] + t * (nu[i + 1] - nu[i]);
            found_right = true;
            break;
        }
    if (!found_left || !found_right)
        throw std::runtime_error("fwhm_of_profile: profile does not fall to half maximum");
    return right - left;
}

Spectrum emitter_spectrum(const EmitterParams& params, double span, double step) {
    auto problems = params.validate();
    if (!problems.empty()) throw std::invalid_argument("emitter_spectrum: " + problems.front());
    Spectrum s = Spectrum::centered(span, step);
    const double fwhm_l = 1.0 / (M_PI * params.t2_hom());
    const double fwhm_g = params.sigma_omega * kSqrt8Ln2 / (2.0 * M_PI);
    s.intensity = voigt_profile(s.grid(), fwhm_l, fwhm_g);
    s.intensity /= s.total();  // unit area on the truncated grid
    return s;
}

double airy_transmission(double nu, const FabryPerotSpec& fp) {
    auto problems = fp.validate();
    if (!problems.empty()) throw std::invalid_argument("airy_transmission: " + problems.front());
    return airy_value(nu, fp.finesse, fp.fsr, fp.peak_transmission);
}

Spectrum fp_instrument_profile(const FabryPerotSpec& fp, double step) {
    auto problems = fp.validate();
    if (!problems.empty())
        throw std::invalid_argument("fp_instrument_profile: " + problems.front());
    if (!(step > 0.0)) throw std::invalid_argument("fp_instrument_profile: step must be > 0");
    Spectrum s = Spectrum::centered(0.5 * fp.fsr, step);
    const int center = (s.n() - 1) / 2;
    if (fp.fwhm() < step) {
        s.intensity[center] = 1.0 / step;  // unresolved: all weight in one bin
        return s;
    }
    for (int i = 0; i < s.n(); ++i)
        s.intensity[i] = airy_value(s.nu(i), fp.finesse, fp.fsr, fp.peak_transmission);
    s.intensity /= s.total();
    return s;
}

Spectrum convolve(const Spectrum& a, const Spectrum& b) {
    if (a.n() == 0 || b.n() == 0) throw std::invalid_argument("convolve: empty spectrum");
    if (!(a.step > 0.0) || std::abs(a.step - b.step) > 1e-9 * a.step)
        throw std::invalid_argument("convolve: spectra must share the same grid step");
    const double m_real = -b.nu_min / b.step;
    const auto m = static_cast<std::int64_t>(std::llround(m_real));
    if (std::abs(m_real - static_cast<double>(m)) > 1e-6)
        throw std::invalid_argument("convolve: kernel grid must contain nu = 0");

    Spectrum out = a;
    out.intensity.setZero();
    for (int i = 0; i < a.n(); ++i) {
        double acc = 0.0;
        const std::int64_t k0 = i + m;
        const int j_lo = static_cast<int>(std::max<std::int64_t>(0, k0 - (b.n() - 1)));
        const int j_hi = static_cast<int>(std::min<std::int64_t>(a.n() - 1, k0));
        for (int j = j_lo; j <= j_hi; ++j)
            acc += a.intensity[j] * b.intensity[static_cast<int>(k0 - j)];
        out.intensity[i] = acc * a.step;
    }
    const double total = out.total();
    const double target = a.total();
    if (total > 0.0 && target > 0.0) out.intensity *= target / total;
    return out;
}

Spectrum scan_spectrum(const Spectrum& line, const FabryPerotSpec& fp) {
    auto problems = fp.validate();
    if (!problems.empty()) throw std::invalid_argument("scan_spectrum: " + problems.front());
    if (line.n() < 3 || !(line.step > 0.0))
        throw std::invalid_argument("scan_spectrum: line spectrum is empty or degenerate");
    const double width = fwhm_of_profile(line.grid(), line.intensity);
    if (!(width < fp.fsr / 10.0))
        throw std::runtime_error(
            "scan_spectrum: line width exceeds fsr/10, neighboring orders would overlap");
    return convolve(line, fp_instrument_profile(fp, line.step));
}

Eigen::ArrayXd coherence_magnitude(const Spectrum& s, const Eigen::ArrayXd& tau) {
    if (s.n() == 0 || !(s.step > 0.0))
        throw std::invalid_argument("coherence_magnitude: empty spectrum");
    const double norm = s.intensity.sum();
    if (!(norm > 0.0)) throw std::invalid_argument("coherence_magnitude: zero total intensity");
    ArrayXd out(tau.size());
    for (Eigen::Index t = 0; t < tau.size(); ++t) {
        std::complex<double> acc(0.0, 0.0);
        const double w = 2.0 * M_PI * tau[t];
        for (int i = 0; i < s.n(); ++i)
            acc += s.intensity[i] * std::polar(1.0, -w * s.nu(i));
        out[t] = std::abs(acc) / norm;
    }
    return out;
}

FitResult coherence_time_from_spectrum(const Spectrum& s, const FabryPerotSpec* fp) {
    const ArrayXd tau = ArrayXd::LinSpaced(61, 0.0, 600e-12);
    const ArrayXd g1 = coherence_magnitude(s, tau);
    std::vector<double> xs, ys;
    xs.reserve(static_cast<std::size_t>(tau.size()));
    ys.reserve(static_cast<std::size_t>(tau.size()));
    if (fp) {
        auto problems = fp->validate();
        if (!problems.empty())
            throw std::invalid_argument("coherence_time_from_spectrum: " + problems.front());
        for (Eigen::Index i = 0; i < tau.size(); ++i) {
            const double correction = std::exp(M_PI * fp->fwhm() * tau[i]);
            if (correction >= 10.0) break;  // instrument dominates from here on
            xs.push_back(tau[i]);
            ys.push_back(g1[i] * correction);
        }
        if (xs.size() < 4)
            throw std::runtime_error(
                "coherence_time_from_spectrum: instrument correction exceeds 10x at almost "
                "every delay; deconvolution is unstable");
    } else {
        for (Eigen::Index i = 0; i < tau.size(); ++i) {
            xs.push_back(tau[i]);
            ys.push_back(g1[i]);
        }
    }
    Dataset1D d;
    d.x = Eigen::Map<const ArrayXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    d.y = Eigen::Map<const ArrayXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    d.x_unit = "s";
    return fit_exponential(d);
}

}  // namespace rfsim
