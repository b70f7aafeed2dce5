#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfsim/histogram.hpp"
#include "rfsim/rng.hpp"

namespace rfsim {

// Photons are generated in fixed-size pulse blocks so that any block can be
// produced independently of the others; results are then identical no matter
// how blocks are distributed across workers.
inline constexpr std::int64_t kChunkPulses = 65536;

struct EmitterParams {
    double t1 = 162e-12;            // radiative lifetime [s]
    double gamma_pd = 8.8183421516755e7;  // pure dephasing rate [1/s]
    double sigma_omega = 2.00e9;    // stationary rms of slow frequency wander [rad/s]
    double tau_c = 0.7e-6;          // correlation time of the wander [s]
    double omega_0 = 0.0;           // mean angular frequency offset [rad/s]
    double rep_rate = 76.4e6;       // excitation repetition rate [Hz]
    double p1 = 0.9965;             // single-photon emission probability per pulse
    double p2 = 0.0035;             // two-photon emission probability per pulse
    double sigma_jitter = 0.0;      // rms excitation-time jitter [s]
    double eta_fiber = 0.066;       // fiber-coupling transmission
    double eta_det = 0.331;         // detector efficiency
    double purcell_ratio = 3.8;     // lifetime ratio off-resonance / on-resonance

    // Coherence time of the fast dynamics alone (radiative + pure dephasing).
    double t2_hom() const { return 1.0 / (0.5 / t1 + gamma_pd); }
    double rep_period() const { return 1.0 / rep_rate; }

    // Returns a list of human-readable problems; empty means usable.
    std::vector<std::string> validate() const;
};

enum class Multiplicity : std::uint8_t { single = 0, pair_first = 1, pair_second = 2 };

struct PhotonRecord {
    std::int64_t pulse_index = 0;
    double t_emit = 0.0;   // excitation instant [s]; radiative delay is drawn at detection
    double omega = 0.0;    // slow-wander frequency offset at this pulse [rad/s]
    Multiplicity tag = Multiplicity::single;
};

struct OUProcessState {
    double omega_current = 0.0;  // wander value at t_last [rad/s]
    double t_last = 0.0;         // time of the last update [s]
    std::int64_t rng_stream_id = 0;  // which draw sequence feeds this walker
};

// One exact update of the mean-reverting Gaussian frequency wander over dt,
// given a standard-normal draw z. Exact for any dt >= 0.
double ou_step(double omega, double omega_0, double sigma_omega, double tau_c, double dt,
               double z);

// Same update in state form: advances the walker by dt, drawing from rng.
OUProcessState ou_step(const OUProcessState& state, double dt, const EmitterParams& params,
                       Rng& rng);

// Variance of the frequency difference between two pulses separated by dt >= 0.
double detuning_variance(double separation, double sigma_omega, double tau_c);

// Detected count rate for a pulsed drive of the given power: r_max scaled by
// the excited-state occupation after the pulse, which is 1 at power == p_pi.
double rabi_rate(double pump_power, double p_pi, double r_max = 1.0);

// Block-wise photon source. Block c can be generated on its own: its starting
// wander value comes from a dedicated boundary sequence with the correct
// stationary law and block-to-block correlation, and its per-pulse draws come
// from a block-specific generator.
class StreamChunker {
  public:
    StreamChunker(const EmitterParams& params, std::int64_t n_pulses, std::uint64_t seed);

    int n_chunks() const { return static_cast<int>(start_omegas_.size()); }
    std::int64_t n_pulses() const { return n_pulses_; }

    // Photons of block c (pulse indices [c*kChunkPulses, min((c+1)*kChunkPulses, n))),
    // before any losses.
    std::vector<PhotonRecord> chunk(int c) const;

  private:
    EmitterParams params_;
    std::int64_t n_pulses_;
    std::uint64_t seed_;
    std::vector<double> start_omegas_;  // wander value at the first pulse of each block
};

// Convenience wrapper: all photons for n_pulses pulses, in pulse order.
std::vector<PhotonRecord> generate_stream(const EmitterParams& params, std::int64_t n_pulses,
                                          std::uint64_t seed);

// Independent Bernoulli thinning with survival probability eta. Draws are keyed
// to each photon's pulse block, so thinning a stream whole or block-by-block
// gives the same survivors.
std::vector<PhotonRecord> apply_losses(const std::vector<PhotonRecord>& photons, double eta,
                                       std::uint64_t seed);

// Histogram of radiative decay delays for n_events draws. The decay constant
// is t1, or t1*purcell_ratio when detuned is set. Range 15 lifetimes, 25 bins
// per lifetime.
CoincidenceHistogram lifetime_histogram(const EmitterParams& params, std::int64_t n_events,
                                        bool detuned, std::uint64_t seed);

}  // namespace rfsim
