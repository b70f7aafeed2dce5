#pragma once

#include <cstdint>
#include <vector>

#include "rfsim/emitter.hpp"
#include "rfsim/histogram.hpp"

namespace rfsim {

// Two-photon overlap of a pair of emissions with fixed frequency difference
// delta_omega [rad/s], equal lifetime t1 and coherence time t2_hom of the
// fast dynamics. Requires t2_hom <= 2*t1.
double pair_visibility(double t1, double t2_hom, double delta_omega);

// Expected overlap reduction from independent Gaussian excitation-time jitter
// with rms sigma_jitter on each of the two photons.
double jitter_overlap_factor(double t1, double sigma_jitter);

// Ensemble two-photon visibility for emissions `separation` seconds apart:
// the fixed-difference overlap averaged over the frequency-wander statistics
// (Gauss-Hermite rule with n_nodes points), times the jitter factor.
double visibility_vs_separation(const EmitterParams& params, double separation,
                                int n_nodes = 128);

struct HomConfig {
    std::int64_t delay_pulses = 1123;   // interferometer arm imbalance in pulse periods
    double splitter_ratio = 0.5;        // probability of taking the long arm
    bool parallel_polarization = true;  // false makes the photons distinguishable
};

// Event-driven two-detector interference experiment. Photons are routed
// through the unbalanced interferometer, photons meeting at the output coupler
// coalesce with the pairwise overlap probability, and detector time
// differences (signed, second detector minus first) are histogrammed over
// +-8.5 pulse periods in period/256 bins. Transmission eta_fiber * eta_det is
// applied per photon. Requires n_pulses > delay_pulses so the two arms
// overlap. Block-parallel and bit-identical for any worker count. A run that
// produces no detector clicks is flagged via empty_input.
CoincidenceHistogram hom_monte_carlo(const EmitterParams& params, const HomConfig& config,
                                     std::int64_t n_pulses, std::uint64_t seed, int workers = 1);

struct VisibilityEstimate {
    double visibility = 0.0;
    double sigma = 0.0;  // counting-statistics standard error
};

// Visibility from the central coincidence areas of a co-polarized and a
// cross-polarized run: 1 - A_parallel / A_crossed within +-half_window. The
// two histograms must share the same binning.
VisibilityEstimate extract_visibility(const CoincidenceHistogram& parallel,
                                      const CoincidenceHistogram& crossed,
                                      double half_window = 1.5e-9);

// Two-detector intensity-correlation experiment on a 50:50 tap, fed with an
// already-thinned photon stream (non-decreasing pulse order). Differences are
// histogrammed over +-12.5 pulse periods in period/256 bins.
CoincidenceHistogram hbt_histogram(const EmitterParams& params,
                                   const std::vector<PhotonRecord>& photons_after_losses,
                                   std::uint64_t seed, int workers = 1);

// Same experiment generating its own stream for n_pulses pulses. Only the
// fiber transmission is applied: detector efficiency scales both ports
// equally and cancels in the normalized result.
CoincidenceHistogram hbt_histogram(const EmitterParams& params, std::int64_t n_pulses,
                                   std::uint64_t seed, int workers = 1);

struct G2Estimate {
    double g2 = 0.0;
    double sigma = 0.0;
    int n_side_peaks = 0;
};

// Normalized same-pulse coincidence rate: central area over the mean
// uncorrelated-peak area (peaks at multiples of period, +-half_window each).
// Requires at least 10 fully contained side peaks.
G2Estimate g2_zero(const CoincidenceHistogram& hist, double period,
                   double half_window = 1.5e-9);

// Fringe contrast of a field interferometer with path imbalance tau: fast
// dephasing decay times the stationary-wander Gaussian decay.
double mz_fringe_contrast(const EmitterParams& params, double tau);

}  // namespace rfsim
