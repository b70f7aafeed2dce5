#pragma once

#include <string>
#include <vector>

#include "rfsim/config.hpp"

namespace rfsim {

inline constexpr int kExitOk = 0;        // success
inline constexpr int kExitInvalid = 1;   // configuration rejected
inline constexpr int kExitUsage = 2;     // unknown dataset/parameter/metric
inline constexpr int kExitNumeric = 3;   // numerical failure at runtime

// Regenerates one reference dataset {1c, 1d, 2a, 2b, 2c, 3a, 3b, 3c}: data
// CSV(s) plus a summary.txt holding the headline scalars with uncertainties.
int run_reproduce(const std::string& dataset_id, const RunConfig& cfg);

// Prints the per-second photon rate chain excitation -> emission -> fiber ->
// detector to stdout.
int run_budget(const RunConfig& cfg);

// One CSV row per value: the emitter parameter is set, the metric
// {visibility, g2, t2_eff} evaluated. `separation` is the emission-time
// separation used by the visibility metric.
int run_sweep(const std::string& param, const std::vector<double>& values,
              const std::string& metric, double separation, const RunConfig& cfg);

// Prints every violated invariant; exit 0 iff the config is usable.
int run_validate(const RunConfig& cfg);

// Dumps the raw photon stream (before any losses) as CSV.
int run_simulate(const RunConfig& cfg);

}  // namespace rfsim
