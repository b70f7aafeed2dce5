#include "rfsim/emitter.hpp"

#include <cmath>
#include <stdexcept>

#include "rfsim/rng.hpp"

namespace rfsim {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

std::vector<std::string> EmitterParams::validate() const {
    std::vector<std::string> problems;
    auto require = [&](bool ok, const char* msg) {
        if (!ok) problems.emplace_back(msg);
    };
    require(finite(t1) && t1 > 0.0, "t1 must be finite and > 0");
    require(finite(gamma_pd) && gamma_pd >= 0.0,
            "gamma_pd must be finite and >= 0 (t2_hom must not exceed 2 * t1)");
    require(finite(sigma_omega) && sigma_omega >= 0.0, "sigma_omega must be finite and >= 0");
    require(finite(tau_c) && tau_c > 0.0, "tau_c must be finite and > 0");
    require(finite(omega_0), "omega_0 must be finite");
    require(finite(rep_rate) && rep_rate > 0.0, "rep_rate must be finite and > 0");
    require(finite(p1) && p1 >= 0.0 && p1 <= 1.0, "p1 must be in [0, 1]");
    require(finite(p2) && p2 >= 0.0 && p2 <= 1.0, "p2 must be in [0, 1]");
    if (finite(p1) && finite(p2)) require(p1 + p2 <= 1.0, "p1 + p2 must not exceed 1");
    require(finite(sigma_jitter) && sigma_jitter >= 0.0, "sigma_jitter must be finite and >= 0");
    require(finite(eta_fiber) && eta_fiber >= 0.0 && eta_fiber <= 1.0,
            "eta_fiber must be in [0, 1]");
    require(finite(eta_det) && eta_det >= 0.0 && eta_det <= 1.0, "eta_det must be in [0, 1]");
    require(finite(purcell_ratio) && purcell_ratio > 0.0, "purcell_ratio must be finite and > 0");
    return problems;
}

double ou_step(double omega, double omega_0, double sigma_omega, double tau_c, double dt,
               double z) {
    if (!(dt >= 0.0) || !finite(dt)) throw std::invalid_argument("ou_step: dt must be >= 0");
    if (!(tau_c > 0.0)) throw std::invalid_argument("ou_step: tau_c must be > 0");
    if (!(sigma_omega >= 0.0)) throw std::invalid_argument("ou_step: sigma_omega must be >= 0");
    const double decay = std::exp(-dt / tau_c);
    const double diffuse = sigma_omega * std::sqrt(-std::expm1(-2.0 * dt / tau_c));
    return omega_0 + (omega - omega_0) * decay + diffuse * z;
}

OUProcessState ou_step(const OUProcessState& state, double dt, const EmitterParams& params,
                       Rng& rng) {
    OUProcessState next = state;
    next.omega_current = ou_step(state.omega_current, params.omega_0, params.sigma_omega,
                                 params.tau_c, dt, rng.normal());
    next.t_last = state.t_last + dt;
    return next;
}

double detuning_variance(double separation, double sigma_omega, double tau_c) {
    if (!(separation >= 0.0)) throw std::invalid_argument("detuning_variance: separation < 0");
    if (!(tau_c > 0.0)) throw std::invalid_argument("detuning_variance: tau_c must be > 0");
    return 2.0 * sigma_omega * sigma_omega * (-std::expm1(-separation / tau_c));
}

double rabi_rate(double pump_power, double p_pi, double r_max) {
    if (!(pump_power >= 0.0)) throw std::invalid_argument("rabi_rate: pump_power must be >= 0");
    if (!(p_pi > 0.0)) throw std::invalid_argument("rabi_rate: p_pi must be > 0");
    if (!(r_max >= 0.0)) throw std::invalid_argument("rabi_rate: r_max must be >= 0");
    const double s = std::sin(0.5 * M_PI * std::sqrt(pump_power / p_pi));
    return r_max * s * s;
}

StreamChunker::StreamChunker(const EmitterParams& params, std::int64_t n_pulses,
                             std::uint64_t seed)
    : params_(params), n_pulses_(n_pulses), seed_(seed) {
    auto problems = params.validate();
    if (!problems.empty()) throw std::invalid_argument("StreamChunker: " + problems.front());
    if (n_pulses < 1) throw std::invalid_argument("StreamChunker: n_pulses must be >= 1");

    const std::int64_t n_chunks = (n_pulses + kChunkPulses - 1) / kChunkPulses;
    start_omegas_.resize(static_cast<std::size_t>(n_chunks));
    if (n_chunks == 0) return;

    // Block-start wander values follow the same mean-reverting law at block
    // granularity: stationary marginal, correlation exp(-block span / tau_c).
    Rng boundary(derive_seed(seed, kSaltBoundary, 0));
    const double rho = std::exp(-static_cast<double>(kChunkPulses) * params_.rep_period() /
                                params_.tau_c);
    const double inno = params_.sigma_omega * std::sqrt(-std::expm1(
                            -2.0 * static_cast<double>(kChunkPulses) * params_.rep_period() /
                            params_.tau_c));
    double w = params_.omega_0 + params_.sigma_omega * boundary.normal();
    start_omegas_[0] = w;
    for (std::int64_t c = 1; c < n_chunks; ++c) {
        w = params_.omega_0 + (w - params_.omega_0) * rho + inno * boundary.normal();
        start_omegas_[static_cast<std::size_t>(c)] = w;
    }
}

std::vector<PhotonRecord> StreamChunker::chunk(int c) const {
    if (c < 0 || c >= n_chunks()) throw std::out_of_range("StreamChunker::chunk: bad index");
    const std::int64_t first = static_cast<std::int64_t>(c) * kChunkPulses;
    const std::int64_t last = std::min(first + kChunkPulses, n_pulses_);

    Rng rng(derive_seed(seed_, kSaltStream, static_cast<std::uint64_t>(c)));
    const double period = params_.rep_period();
    double omega = start_omegas_[static_cast<std::size_t>(c)];

    std::vector<PhotonRecord> out;
    out.reserve(static_cast<std::size_t>(
        static_cast<double>(last - first) * (params_.p1 + 2.0 * params_.p2) + 64.0));

    for (std::int64_t k = first; k < last; ++k) {
        // Fixed per-pulse draw order: multiplicity, wander innovation, then
        // one jitter draw per emitted photon.
        const double u = rng.uniform01();
        const double z = rng.normal();
        const double t_pulse = static_cast<double>(k) * period;
        auto emit = [&](Multiplicity tag) {
            PhotonRecord rec;
            rec.pulse_index = k;
            rec.omega = omega;
            rec.tag = tag;
            rec.t_emit = t_pulse + (params_.sigma_jitter > 0.0
                                        ? rng.normal(0.0, params_.sigma_jitter)
                                        : 0.0);
            out.push_back(rec);
        };
        if (u < params_.p2) {
            emit(Multiplicity::pair_first);
            emit(Multiplicity::pair_second);
        } else if (u < params_.p2 + params_.p1) {
            emit(Multiplicity::single);
        }
        omega = ou_step(omega, params_.omega_0, params_.sigma_omega, params_.tau_c, period, z);
    }
    return out;
}

std::vector<PhotonRecord> generate_stream(const EmitterParams& params, std::int64_t n_pulses,
                                          std::uint64_t seed) {
    StreamChunker chunker(params, n_pulses, seed);
    std::vector<PhotonRecord> out;
    for (int c = 0; c < chunker.n_chunks(); ++c) {
        auto part = chunker.chunk(c);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::vector<PhotonRecord> apply_losses(const std::vector<PhotonRecord>& photons, double eta,
                                       std::uint64_t seed) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("apply_losses: eta in [0, 1]");
    std::vector<PhotonRecord> out;
    out.reserve(static_cast<std::size_t>(static_cast<double>(photons.size()) * eta + 64.0));
    std::int64_t current_chunk = -1;
    Rng rng(0);
    for (const PhotonRecord& rec : photons) {
        const std::int64_t chunk = rec.pulse_index / kChunkPulses;
        if (chunk != current_chunk) {
            current_chunk = chunk;
            rng = Rng(derive_seed(seed, kSaltLoss, static_cast<std::uint64_t>(chunk)));
        }
        if (rng.bernoulli(eta)) out.push_back(rec);
    }
    return out;
}

CoincidenceHistogram lifetime_histogram(const EmitterParams& params, std::int64_t n_events,
                                        bool detuned, std::uint64_t seed) {
    auto problems = params.validate();
    if (!problems.empty()) throw std::invalid_argument("lifetime_histogram: " + problems.front());
    if (n_events <= 0) throw std::invalid_argument("lifetime_histogram: n_events must be > 0");
    const double tau = params.t1 * (detuned ? params.purcell_ratio : 1.0);
    const double bin = tau / 25.0;
    CoincidenceHistogram hist(0.0, 375.0 * bin, bin);
    std::int64_t done = 0;
    std::uint64_t chunk = 0;
    while (done < n_events) {
        const std::int64_t n = std::min<std::int64_t>(kChunkPulses, n_events - done);
        Rng rng(derive_seed(seed, kSaltLifetime, chunk));
        for (std::int64_t i = 0; i < n; ++i) hist.fill(rng.exponential(tau));
        done += n;
        ++chunk;
    }
    hist.n_events_processed = n_events;
    return hist;
}

}  // namespace rfsim
