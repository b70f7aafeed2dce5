#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rfsim/emitter.hpp"
#include "rfsim/spectra.hpp"

namespace rfsim {

// Everything a run needs: physics parameters, instrument settings, event
// counts, seeding and output placement. Zero event counts mean "use the
// per-task desk-scale default".
struct RunConfig {
    EmitterParams emitter;
    FabryPerotSpec fp;
    std::int64_t n_pulses = 0;       // excitation pulses for Monte Carlo runs (0 = auto)
    std::int64_t n_events = 0;       // decay draws for lifetime histograms (0 = auto)
    std::int64_t delay_pulses = 1123;  // interferometer arm imbalance [pulse periods]
    double pump_power_pi = 1.0;      // pump power that fully inverts the emitter [arb]
    double noise_fraction = 0.01;    // additive detector noise on synthetic scans, rel. peak
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    int workers = 1;
};

// Applies one `key = value` assignment. `t2_hom` is accepted as a convenience
// alias that sets gamma_pd from the current t1 (set t1 first). Unknown keys
// and unparsable values throw invalid_argument.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat `key = value` file with `#` comments (full-line or trailing).
RunConfig load_config(const std::filesystem::path& path);

// All invariant violations, human-readable; empty means the config is usable.
std::vector<std::string> config_violations(const RunConfig& cfg);

// Canonical `key = value` text of every content-bearing field. Seed, output
// directory and worker count are deliberately excluded: results must be
// byte-identical across worker counts, the seed is reported separately, and
// the output location does not alter any output byte.
std::string serialize_config(const RunConfig& cfg);

// FNV-1a (64-bit) over the canonical serialization.
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_hash_hex(const RunConfig& cfg);

}  // namespace rfsim
