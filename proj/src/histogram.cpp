#include "rfsim/histogram.hpp"

#include <cmath>
#include <stdexcept>

namespace rfsim {

CoincidenceHistogram::CoincidenceHistogram(double t_min_, double t_max_, double bin_width_)
    : t_min(t_min_), t_max(t_max_), bin_width(bin_width_) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("histogram: bin_width must be > 0");
    if (!(t_max > t_min)) throw std::invalid_argument("histogram: t_max must exceed t_min");
    const double n_real = (t_max - t_min) / bin_width;
    const int n = static_cast<int>(std::llround(n_real));
    if (n <= 0 || std::abs(n_real - n) > 1e-6)
        throw std::invalid_argument("histogram: range must be an integer number of bins");
    counts = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(n);
}

void CoincidenceHistogram::fill(double t) {
    if (t < t_min || t >= t_max) return;
    int i = static_cast<int>((t - t_min) / bin_width);
    if (i >= n_bins()) i = n_bins() - 1;
    counts[i] += 1;
}

std::int64_t CoincidenceHistogram::area(double lo, double hi) const {
    std::int64_t acc = 0;
    for (int i = 0; i < n_bins(); ++i) {
        const double c = bin_center(i);
        if (c >= lo && c <= hi) acc += counts[i];
    }
    return acc;
}

std::int64_t CoincidenceHistogram::central_area(double half_window) const {
    return area(-half_window, half_window);
}

double CoincidenceHistogram::side_peak_mean(double period, double half_window,
                                            int* n_peaks_out) const {
    if (!(period > 0.0)) throw std::invalid_argument("side_peak_mean: period must be > 0");
    std::int64_t total = 0;
    int n_peaks = 0;
    for (int sign : {-1, 1}) {
        for (int m = 1;; ++m) {
            const double center = sign * m * period;
            if (center - half_window < t_min || center + half_window > t_max) break;
            total += area(center - half_window, center + half_window);
            ++n_peaks;
        }
    }
    if (n_peaks_out) *n_peaks_out = n_peaks;
    if (n_peaks == 0) return 0.0;
    return static_cast<double>(total) / n_peaks;
}

void CoincidenceHistogram::merge(const CoincidenceHistogram& other) {
    if (other.n_bins() != n_bins() || other.t_min != t_min || other.bin_width != bin_width)
        throw std::invalid_argument("histogram merge: incompatible binning");
    counts += other.counts;
    n_events_processed += other.n_events_processed;
}

}  // namespace rfsim
