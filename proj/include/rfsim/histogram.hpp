#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace rfsim {

// Uniformly binned coincidence/delay histogram. Time is in seconds internally;
// CSV output converts to picoseconds.
struct CoincidenceHistogram {
    double t_min = 0.0;
    double t_max = 0.0;
    double bin_width = 0.0;
    Eigen::Array<std::int64_t, Eigen::Dynamic, 1> counts;
    std::int64_t n_events_processed = 0;
    bool empty_input = false;

    CoincidenceHistogram() = default;
    // n_bins must equal round((t_max - t_min)/bin_width); throws otherwise.
    CoincidenceHistogram(double t_min, double t_max, double bin_width);

    int n_bins() const { return static_cast<int>(counts.size()); }
    double bin_center(int i) const { return t_min + (i + 0.5) * bin_width; }

    // Drops samples outside [t_min, t_max).
    void fill(double t);

    // Sum of counts with bin center in [lo, hi].
    std::int64_t area(double lo, double hi) const;

    // Central-peak area: bins within +-half_window of zero delay.
    std::int64_t central_area(double half_window) const;

    // Mean area of the side peaks at t = m*period (m != 0) that fit entirely
    // inside the histogram range, each integrated over +-half_window.
    // Returns the number of peaks used through n_peaks_out.
    double side_peak_mean(double period, double half_window, int* n_peaks_out = nullptr) const;

    void merge(const CoincidenceHistogram& other);
};

}  // namespace rfsim
