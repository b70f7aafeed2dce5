#include "rfsim/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rfsim/math.hpp"
#include "rfsim/rng.hpp"

namespace rfsim {

namespace {

struct Click {
    std::int64_t slot = 0;
    double t = 0.0;
    std::uint8_t port = 0;
};

struct RoutedPhoton {
    std::int64_t slot = 0;
    std::int64_t pulse_index = 0;
    double t_base = 0.0;  // arrival instant at the output coupler, before decay
    double omega = 0.0;
    Multiplicity tag = Multiplicity::single;
    bool long_arm = false;
};

// Runs fn(c) for every chunk in [0, n_chunks), filling results[c]. Chunks are
// pure functions of their index, so the outcome does not depend on workers.
template <typename Fn>
void run_chunks(int n_chunks, int workers, std::vector<std::vector<Click>>& results, Fn fn) {
    results.assign(static_cast<std::size_t>(n_chunks), {});
    workers = std::max(1, std::min(workers, n_chunks));
    if (workers == 1) {
        for (int c = 0; c < n_chunks; ++c) results[static_cast<std::size_t>(c)] = fn(c);
        return;
    }
    const int per = (n_chunks + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int lo = w * per;
        const int hi = std::min(n_chunks, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&results, fn, lo, hi]() {
            for (int c = lo; c < hi; ++c) results[static_cast<std::size_t>(c)] = fn(c);
        });
    }
    for (auto& t : pool) t.join();
}

// Serial sweep over slot-ordered clicks; every unordered opposite-port pair
// within slot_window slots contributes one signed difference t(port 1) -
// t(port 0).
void pair_clicks(const std::vector<std::vector<Click>>& per_chunk, std::int64_t slot_window,
                 CoincidenceHistogram& hist) {
    std::deque<Click> window;
    std::int64_t n_clicks = 0;
    for (const auto& chunk : per_chunk) {
        for (const Click& c : chunk) {
            ++n_clicks;
            while (!window.empty() && window.front().slot < c.slot - slot_window)
                window.pop_front();
            for (const Click& o : window) {
                if (o.port == c.port) continue;
                const double dt = (c.port == 1) ? c.t - o.t : o.t - c.t;
                hist.fill(dt);
            }
            window.push_back(c);
        }
    }
    hist.n_events_processed = n_clicks;
}

std::vector<RoutedPhoton> routed_pulse_chunk(const StreamChunker& chunker,
                                             const EmitterParams& params,
                                             const HomConfig& config, double eta,
                                             std::uint64_t seed, int pulse_chunk) {
    const std::vector<PhotonRecord> kept =
        apply_losses(chunker.chunk(pulse_chunk), eta, seed);
    Rng rng(derive_seed(seed, kSaltHom, static_cast<std::uint64_t>(pulse_chunk)));
    const double period = params.rep_period();
    std::vector<RoutedPhoton> out;
    out.reserve(kept.size());
    for (const PhotonRecord& rec : kept) {
        RoutedPhoton r;
        r.long_arm = rng.bernoulli(config.splitter_ratio);
        r.pulse_index = rec.pulse_index;
        r.slot = rec.pulse_index + (r.long_arm ? config.delay_pulses : 0);
        r.t_base = rec.t_emit + (r.long_arm ? config.delay_pulses * period : 0.0);
        r.omega = rec.omega;
        r.tag = rec.tag;
        out.push_back(r);
    }
    return out;
}

}  // namespace

double pair_visibility(double t1, double t2_hom, double delta_omega) {
    if (!(t1 > 0.0)) throw std::invalid_argument("pair_visibility: t1 must be > 0");
    if (!(t2_hom > 0.0)) throw std::invalid_argument("pair_visibility: t2_hom must be > 0");
    if (t2_hom > 2.0 * t1 * (1.0 + 1e-12))
        throw std::invalid_argument("pair_visibility: t2_hom must not exceed 2*t1");
    if (!std::isfinite(delta_omega))
        throw std::invalid_argument("pair_visibility: delta_omega must be finite");
    const double x = 0.5 * delta_omega * t2_hom;
    return (t2_hom / (2.0 * t1)) / (1.0 + x * x);
}

double jitter_overlap_factor(double t1, double sigma_jitter) {
    if (!(t1 > 0.0)) throw std::invalid_argument("jitter_overlap_factor: t1 must be > 0");
    if (!(sigma_jitter >= 0.0))
        throw std::invalid_argument("jitter_overlap_factor: sigma_jitter must be >= 0");
    return erfcx(sigma_jitter / t1);
}

double visibility_vs_separation(const EmitterParams& params, double separation, int n_nodes) {
    auto problems = params.validate();
    if (!problems.empty())
        throw std::invalid_argument("visibility_vs_separation: " + problems.front());
    if (!(separation >= 0.0))
        throw std::invalid_argument("visibility_vs_separation: separation must be >= 0");
    if (n_nodes < 64)
        throw std::invalid_argument("visibility_vs_separation: need at least 64 nodes");
    const double t2h = params.t2_hom();
    const double jitter = jitter_overlap_factor(params.t1, params.sigma_jitter);
    const double var = detuning_variance(separation, params.sigma_omega, params.tau_c);
    if (var <= 0.0) return pair_visibility(params.t1, t2h, 0.0) * jitter;
    const double s = std::sqrt(var);
    const double mean = gauss_hermite_mean(gauss_hermite(n_nodes), 0.0, s, [&](double delta) {
        return pair_visibility(params.t1, t2h, delta);
    });
    return mean * jitter;
}

CoincidenceHistogram hom_monte_carlo(const EmitterParams& params, const HomConfig& config,
                                     std::int64_t n_pulses, std::uint64_t seed, int workers) {
    auto problems = params.validate();
    if (!problems.empty()) throw std::invalid_argument("hom_monte_carlo: " + problems.front());
    if (config.delay_pulses < 1)
        throw std::invalid_argument("hom_monte_carlo: delay_pulses must be >= 1");
    if (!(config.splitter_ratio > 0.0 && config.splitter_ratio < 1.0))
        throw std::invalid_argument("hom_monte_carlo: splitter_ratio must be in (0, 1)");
    if (n_pulses < config.delay_pulses + 1)
        throw std::invalid_argument(
            "hom_monte_carlo: n_pulses must exceed delay_pulses so the arms overlap");
    if (workers < 1) throw std::invalid_argument("hom_monte_carlo: workers must be >= 1");

    const double period = params.rep_period();
    const double bin = period / 256.0;
    CoincidenceHistogram hist(-8.5 * period, 8.5 * period, bin);

    const double eta = params.eta_fiber * params.eta_det;
    const double t2h = params.t2_hom();
    const std::int64_t k = config.delay_pulses;
    const std::int64_t n_slots = n_pulses + k;
    const int n_slot_chunks = static_cast<int>((n_slots + kChunkPulses - 1) / kChunkPulses);
    StreamChunker chunker(params, n_pulses, seed);

    auto make_clicks = [&](int sc) -> std::vector<Click> {
        const std::int64_t slot_lo = static_cast<std::int64_t>(sc) * kChunkPulses;
        const std::int64_t slot_hi = std::min(slot_lo + kChunkPulses, n_slots);

        // Pulse blocks feeding these slots: the same block through the short
        // arm, one or two earlier blocks through the long arm.
        std::vector<int> pulse_chunks;
        auto add_range = [&](std::int64_t p_lo, std::int64_t p_hi) {
            p_lo = std::max<std::int64_t>(p_lo, 0);
            p_hi = std::min(p_hi, chunker.n_pulses());
            if (p_lo >= p_hi) return;
            for (std::int64_t pc = p_lo / kChunkPulses; pc <= (p_hi - 1) / kChunkPulses; ++pc) {
                const int v = static_cast<int>(pc);
                if (std::find(pulse_chunks.begin(), pulse_chunks.end(), v) == pulse_chunks.end())
                    pulse_chunks.push_back(v);
            }
        };
        add_range(slot_lo, slot_hi);          // short arm
        add_range(slot_lo - k, slot_hi - k);  // long arm
        std::sort(pulse_chunks.begin(), pulse_chunks.end());

        std::vector<RoutedPhoton> pool;
        for (int pc : pulse_chunks)
            for (const RoutedPhoton& r : routed_pulse_chunk(chunker, params, config, eta, seed, pc))
                if (r.slot >= slot_lo && r.slot < slot_hi) pool.push_back(r);
        std::stable_sort(pool.begin(), pool.end(), [](const RoutedPhoton& a, const RoutedPhoton& b) {
            if (a.slot != b.slot) return a.slot < b.slot;
            if (a.long_arm != b.long_arm) return !a.long_arm;
            if (a.pulse_index != b.pulse_index) return a.pulse_index < b.pulse_index;
            return static_cast<int>(a.tag) < static_cast<int>(b.tag);
        });

        Rng rng(derive_seed(seed, kSaltPort, static_cast<std::uint64_t>(sc)));
        std::vector<Click> clicks;
        clicks.reserve(pool.size());
        std::size_t i = 0;
        while (i < pool.size()) {
            std::size_t j = i + 1;
            while (j < pool.size() && pool[j].slot == pool[i].slot) ++j;
            const std::size_t n = j - i;

            bool coalesced = false;
            if (n == 2 && pool[i].long_arm != pool[i + 1].long_arm) {
                double m = 0.0;
                if (config.parallel_polarization) {
                    const double delta = pool[i].omega - pool[i + 1].omega;
                    m = pair_visibility(params.t1, t2h, delta) *
                        std::exp(-std::abs(pool[i].t_base - pool[i + 1].t_base) / params.t1);
                }
                coalesced = rng.uniform01() < m;
            }
            std::uint8_t shared_port = 0;
            if (coalesced) shared_port = rng.bernoulli(0.5) ? 1 : 0;
            std::vector<std::uint8_t> ports(n);
            for (std::size_t q = 0; q < n; ++q)
                ports[q] = coalesced ? shared_port : (rng.bernoulli(0.5) ? 1 : 0);
            for (std::size_t q = 0; q < n; ++q) {
                Click c;
                c.slot = pool[i + q].slot;
                c.port = ports[q];
                c.t = pool[i + q].t_base + rng.exponential(params.t1);
                clicks.push_back(c);
            }
            i = j;
        }
        return clicks;
    };

    std::vector<std::vector<Click>> per_chunk;
    run_chunks(n_slot_chunks, workers, per_chunk, make_clicks);
    pair_clicks(per_chunk, 10, hist);
    hist.empty_input = (hist.n_events_processed == 0);
    return hist;
}

VisibilityEstimate extract_visibility(const CoincidenceHistogram& parallel,
                                      const CoincidenceHistogram& crossed,
                                      double half_window) {
    if (!(half_window > 0.0))
        throw std::invalid_argument("extract_visibility: half_window must be > 0");
    if (parallel.t_min != crossed.t_min || parallel.t_max != crossed.t_max ||
        parallel.bin_width != crossed.bin_width)
        throw std::invalid_argument("extract_visibility: histograms must share one binning");
    const auto a_par = static_cast<double>(parallel.central_area(half_window));
    const auto a_cross = static_cast<double>(crossed.central_area(half_window));
    if (a_cross <= 0.0)
        throw std::runtime_error("extract_visibility: no crossed-polarization coincidences");
    VisibilityEstimate est;
    est.visibility = 1.0 - a_par / a_cross;
    const double a_eff = std::max(a_par, 1.0);
    est.sigma = (a_eff / a_cross) * std::sqrt(1.0 / a_eff + 1.0 / a_cross);
    return est;
}

namespace {

// Port and detection-time draws for the photons of one pulse block, keyed to
// the block index so any partitioning of the stream gives the same clicks.
std::vector<Click> hbt_clicks_for_block(const EmitterParams& params,
                                        const PhotonRecord* first, const PhotonRecord* last,
                                        std::uint64_t seed, std::int64_t block) {
    Rng rng(derive_seed(seed, kSaltHbt, static_cast<std::uint64_t>(block)));
    std::vector<Click> clicks;
    clicks.reserve(static_cast<std::size_t>(last - first));
    for (const PhotonRecord* rec = first; rec != last; ++rec) {
        Click c;
        c.slot = rec->pulse_index;
        c.port = rng.bernoulli(0.5) ? 1 : 0;
        c.t = rec->t_emit + rng.exponential(params.t1);
        clicks.push_back(c);
    }
    return clicks;
}

CoincidenceHistogram hbt_empty_histogram(const EmitterParams& params) {
    const double period = params.rep_period();
    return CoincidenceHistogram(-12.5 * period, 12.5 * period, period / 256.0);
}

}  // namespace

CoincidenceHistogram hbt_histogram(const EmitterParams& params,
                                   const std::vector<PhotonRecord>& photons_after_losses,
                                   std::uint64_t seed, int workers) {
    auto problems = params.validate();
    if (!problems.empty()) throw std::invalid_argument("hbt_histogram: " + problems.front());
    if (workers < 1) throw std::invalid_argument("hbt_histogram: workers must be >= 1");
    for (std::size_t i = 0; i < photons_after_losses.size(); ++i) {
        if (photons_after_losses[i].pulse_index < 0 ||
            (i > 0 &&
             photons_after_losses[i].pulse_index < photons_after_losses[i - 1].pulse_index))
            throw std::invalid_argument(
                "hbt_histogram: photons must be in non-decreasing pulse order");
    }

    CoincidenceHistogram hist = hbt_empty_histogram(params);

    // Contiguous runs of photons sharing a pulse block.
    struct Group {
        std::int64_t block;
        std::size_t begin, end;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < photons_after_losses.size();) {
        const std::int64_t block = photons_after_losses[i].pulse_index / kChunkPulses;
        std::size_t j = i + 1;
        while (j < photons_after_losses.size() &&
               photons_after_losses[j].pulse_index / kChunkPulses == block)
            ++j;
        groups.push_back({block, i, j});
        i = j;
    }

    auto make_clicks = [&](int g) -> std::vector<Click> {
        const Group& grp = groups[static_cast<std::size_t>(g)];
        return hbt_clicks_for_block(params, photons_after_losses.data() + grp.begin,
                                    photons_after_losses.data() + grp.end, seed, grp.block);
    };
    std::vector<std::vector<Click>> per_chunk;
    run_chunks(static_cast<int>(groups.size()), workers, per_chunk, make_clicks);
    pair_clicks(per_chunk, 14, hist);
    hist.empty_input = (hist.n_events_processed == 0);
    return hist;
}

CoincidenceHistogram hbt_histogram(const EmitterParams& params, std::int64_t n_pulses,
                                   std::uint64_t seed, int workers) {
    auto problems = params.validate();
    if (!problems.empty()) throw std::invalid_argument("hbt_histogram: " + problems.front());
    if (n_pulses < 1) throw std::invalid_argument("hbt_histogram: n_pulses must be >= 1");
    if (workers < 1) throw std::invalid_argument("hbt_histogram: workers must be >= 1");

    CoincidenceHistogram hist = hbt_empty_histogram(params);

    StreamChunker chunker(params, n_pulses, seed);
    auto make_clicks = [&](int pc) -> std::vector<Click> {
        const std::vector<PhotonRecord> kept =
            apply_losses(chunker.chunk(pc), params.eta_fiber, seed);
        return hbt_clicks_for_block(params, kept.data(), kept.data() + kept.size(), seed, pc);
    };

    std::vector<std::vector<Click>> per_chunk;
    run_chunks(chunker.n_chunks(), workers, per_chunk, make_clicks);
    pair_clicks(per_chunk, 14, hist);
    hist.empty_input = (hist.n_events_processed == 0);
    return hist;
}

G2Estimate g2_zero(const CoincidenceHistogram& hist, double period, double half_window) {
    if (!(period > 0.0) || !(half_window > 0.0) || !(half_window < 0.5 * period))
        throw std::invalid_argument("g2_zero: need 0 < half_window < period/2");
    int n_peaks = 0;
    const double side_mean = hist.side_peak_mean(period, half_window, &n_peaks);
    if (n_peaks < 10)
        throw std::runtime_error("g2_zero: fewer than 10 uncorrelated peaks in range");
    if (!(side_mean > 0.0)) throw std::runtime_error("g2_zero: empty uncorrelated peaks");
    const auto central = static_cast<double>(hist.central_area(half_window));
    G2Estimate est;
    est.n_side_peaks = n_peaks;
    est.g2 = central / side_mean;
    const double c_eff = std::max(central, 1.0);
    est.sigma = (c_eff / side_mean) *
                std::sqrt(1.0 / c_eff + 1.0 / (side_mean * static_cast<double>(n_peaks)));
    return est;
}

double mz_fringe_contrast(const EmitterParams& params, double tau) {
    auto problems = params.validate();
    if (!problems.empty()) throw std::invalid_argument("mz_fringe_contrast: " + problems.front());
    if (!(tau >= 0.0)) throw std::invalid_argument("mz_fringe_contrast: tau must be >= 0");
    const double s = params.sigma_omega * tau;
    return std::exp(-tau / params.t2_hom()) * std::exp(-0.5 * s * s);
}

}  // namespace rfsim
