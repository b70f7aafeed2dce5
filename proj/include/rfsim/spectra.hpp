#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rfsim/emitter.hpp"
#include "rfsim/fitting.hpp"

namespace rfsim {

// Intensity on a uniform frequency grid, nu measured from the line center [Hz].
struct Spectrum {
    double nu_min = 0.0;
    double step = 0.0;
    Eigen::ArrayXd intensity;

    int n() const { return static_cast<int>(intensity.size()); }
    double nu(int i) const { return nu_min + i * step; }
    Eigen::ArrayXd grid() const;
    // Trapezoidal integral over the grid.
    double total() const {
        if (intensity.size() == 0) return 0.0;
        if (intensity.size() == 1) return intensity[0] * step;
        return step * (intensity.sum() - 0.5 * (intensity[0] + intensity[intensity.size() - 1]));
    }

    // Symmetric grid [-span, span] with the given step (span is rounded to a
    // whole number of steps).
    static Spectrum centered(double span, double step);
};

struct FabryPerotSpec {
    double finesse = 170.0;
    double fsr = 37.4e9;              // free spectral range [Hz]
    double peak_transmission = 0.61;

    double fwhm() const { return fsr / finesse; }
    std::vector<std::string> validate() const;
};

// Unit-area line profiles centered at nu = 0, fwhm in the same unit as nu.
double lorentzian(double nu, double fwhm);
double gaussian(double nu, double fwhm);

// Unit-area Voigt profile: a Lorentzian of width fwhm_l smeared by a Gaussian
// of width fwhm_g. Computed as a renormalized discrete Gaussian mixture of
// analytic Lorentzians (step <= min(fwhm)/50, kernel out to 8 Gaussian sigma);
// pure limits fall back to the closed forms.
double voigt_profile(double nu, double fwhm_l, double fwhm_g);
Eigen::ArrayXd voigt_profile(const Eigen::ArrayXd& nu, double fwhm_l, double fwhm_g);

// Full width at half maximum of a profile sampled on a uniform grid, using
// linear interpolation at the half-maximum crossings.
double fwhm_of_profile(const Eigen::ArrayXd& nu, const Eigen::ArrayXd& y);

// Time-averaged emission line of the pulsed source: fast-dynamics Lorentzian
// of width 1/(pi * t2_hom) under the stationary Gaussian frequency wander.
// Renormalized to unit area on the grid [-span, span].
Spectrum emitter_spectrum(const EmitterParams& params, double span = 25e9, double step = 10e6);

// Transmission of the scanning cavity at detuning nu from a resonance.
double airy_transmission(double nu, const FabryPerotSpec& fp);

// One cavity order as a unit-area profile on [-fsr/2, fsr/2]. If the cavity
// line is narrower than the grid step, a single-bin spike is returned.
Spectrum fp_instrument_profile(const FabryPerotSpec& fp, double step);

// Discrete convolution of two spectra sampled with the same step, evaluated on
// the grid of `a` and renormalized to the area of `a`.
Spectrum convolve(const Spectrum& a, const Spectrum& b);

// What a detector behind the scanning cavity records versus cavity detuning:
// the line smeared by one cavity order (single-peak approximation). Requires
// the line to be narrow compared to the free spectral range (width < fsr/10),
// otherwise neighboring orders overlap and the scan is ambiguous.
Spectrum scan_spectrum(const Spectrum& line, const FabryPerotSpec& fp);

// Magnitude of the normalized field autocorrelation obtained from a spectrum
// by Fourier transform at the requested delays.
Eigen::ArrayXd coherence_magnitude(const Spectrum& s, const Eigen::ArrayXd& tau);

// Coherence decay time fitted on |g1|(tau) for tau in [0, 600 ps] (10 ps
// steps). When fp is given, the spectrum is assumed to be a cavity scan and
// each point is first divided by the cavity's own coherence decay; delays
// where that correction reaches 10x are dropped, and if too few usable
// delays remain the deconvolution is reported as unstable. Returns the
// exponential fit (params: amplitude, tau, baseline).
FitResult coherence_time_from_spectrum(const Spectrum& s, const FabryPerotSpec* fp = nullptr);

}  // namespace rfsim
