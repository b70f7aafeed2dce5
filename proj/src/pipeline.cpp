#include "rfsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>

#include "rfsim/csv.hpp"
#include "rfsim/instruments.hpp"
#include "rfsim/rng.hpp"

namespace rfsim {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

std::string value_pm(double v, double err) {
    return fmt("%.6g", v) + " +- " + fmt("%.3g", err);
}

// Desk-scale defaults: enough statistics for the documented tolerances in
// well under a minute per dataset.
std::int64_t pulses_or(const RunConfig& cfg, std::int64_t dflt) {
    return cfg.n_pulses > 0 ? cfg.n_pulses : dflt;
}
std::int64_t events_or(const RunConfig& cfg, std::int64_t dflt) {
    return cfg.n_events > 0 ? cfg.n_events : dflt;
}

int reject_if_invalid(const RunConfig& cfg) {
    const auto problems = config_violations(cfg);
    for (const auto& p : problems) std::fprintf(stderr, "violation: %s\n", p.c_str());
    return problems.empty() ? kExitOk : kExitInvalid;
}

MetaList base_meta(const std::string& dataset, const RunConfig& cfg) {
    return {{"dataset", dataset},
            {"seed", std::to_string(cfg.seed)},
            {"config_hash", config_hash_hex(cfg)}};
}

struct Summary {
    std::vector<std::string> lines;

    void add(const std::string& key, const std::string& value) {
        lines.push_back(key + " = " + value);
    }
    void add_block(const std::string& block) {
        lines.emplace_back();
        for (std::size_t pos = 0; pos < block.size();) {
            const auto nl = block.find('\n', pos);
            lines.push_back(block.substr(pos, nl - pos));
            if (nl == std::string::npos) break;
            pos = nl + 1;
        }
        if (!lines.empty() && lines.back().empty()) lines.pop_back();
    }
    std::string text() const {
        std::string out;
        for (const auto& l : lines) out += l + "\n";
        return out;
    }
};

Summary make_summary(const std::string& dataset, const RunConfig& cfg) {
    Summary s;
    s.add("dataset", dataset);
    s.add("seed", std::to_string(cfg.seed));
    s.add("config_hash", config_hash_hex(cfg));
    s.add("note", "event counts reproduce the reference statistics, not the "
                  "acquisition duration");
    return s;
}

void write_summary(const RunConfig& cfg, const Summary& s) {
    write_text_atomic(fs::path(cfg.out_dir) / "summary.txt", s.text());
}

Dataset1D histogram_dataset(const CoincidenceHistogram& hist) {
    Dataset1D d;
    d.x.resize(static_cast<Eigen::Index>(hist.counts.size()));
    d.y.resize(d.x.size());
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        d.x[i] = hist.t_min + (static_cast<double>(i) + 0.5) * hist.bin_width;
        d.y[i] = hist.counts[static_cast<std::size_t>(i)];
    }
    d.x_unit = "s";
    d.y_unit = "counts";
    return d;
}

// ---- dataset 1c: detected rate versus pump power with a saturation fit ----

int reproduce_1c(const RunConfig& cfg) {
    const int n_points = 26;
    const double scale = 2000.0;  // mean counts at a full inversion
    Rng rng(derive_seed(cfg.seed, kSaltNoise, 1));
    Dataset1D d;
    d.x.resize(n_points);
    d.y.resize(n_points);
    d.y_err.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double p = 5.0 * cfg.pump_power_pi * i / (n_points - 1.0);
        const double mean = scale * rabi_rate(p, cfg.pump_power_pi);
        const auto counts = static_cast<double>(rng.poisson(mean));
        d.x[i] = p;
        d.y[i] = counts;
        d.y_err[i] = std::sqrt(std::max(counts, 1.0));
    }
    d.x_unit = "pump power [arb]";
    d.y_unit = "counts";
    const FitResult fr = fit_rabi(d);

    auto meta = base_meta("1c", cfg);
    meta.emplace_back("counts_scale", fmt("%.0f", scale));
    write_text_atomic(fs::path(cfg.out_dir) / "fig1c_rabi.csv",
                      dataset_csv(d, "pump_power", "counts", "counts_err", meta));
    write_text_atomic(fs::path(cfg.out_dir) / "fig1c_fit_rabi.csv",
                      fit_result_csv("rabi_saturation", fr, meta));

    Summary s = make_summary("1c", cfg);
    s.add("power_pi", value_pm(fr.params[1], fr.errors[1]));
    s.add_block(fit_result_text("rabi_saturation", fr));
    write_summary(cfg, s);
    return kExitOk;
}

// ---- dataset 1d: intensity-correlation histogram and g2(0) ----

int reproduce_1d(const RunConfig& cfg) {
    const std::int64_t n = pulses_or(cfg, 10'000'000);
    const auto hist = hbt_histogram(cfg.emitter, n, cfg.seed, cfg.workers);
    const auto est = g2_zero(hist, cfg.emitter.rep_period());

    auto meta = base_meta("1d", cfg);
    meta.emplace_back("n_pulses", std::to_string(n));
    write_text_atomic(fs::path(cfg.out_dir) / "fig1d_g2.csv", histogram_csv(hist, meta));

    Summary s = make_summary("1d", cfg);
    s.add("n_pulses", std::to_string(n));
    s.add("g2_zero", value_pm(est.g2, est.sigma));
    s.add("n_side_peaks", std::to_string(est.n_side_peaks));
    write_summary(cfg, s);
    return kExitOk;
}

// ---- datasets 2a/2b: two-photon interference at short / long arm delay ----

int reproduce_hom(const RunConfig& cfg, const std::string& id, std::int64_t delay_pulses) {
    const std::int64_t n = pulses_or(cfg, 1'000'000);
    if (n <= delay_pulses) {
        std::fprintf(stderr, "violation: n_pulses must exceed delay_pulses (%lld <= %lld)\n",
                     static_cast<long long>(n), static_cast<long long>(delay_pulses));
        return kExitInvalid;
    }
    HomConfig hc;
    hc.delay_pulses = delay_pulses;
    const auto par = hom_monte_carlo(cfg.emitter, hc, n, cfg.seed, cfg.workers);
    hc.parallel_polarization = false;
    const auto crossed = hom_monte_carlo(cfg.emitter, hc, n, cfg.seed + 1, cfg.workers);
    const auto est = extract_visibility(par, crossed);
    const double separation = static_cast<double>(delay_pulses) * cfg.emitter.rep_period();
    const double v_expected = visibility_vs_separation(cfg.emitter, separation);

    auto meta = base_meta(id, cfg);
    meta.emplace_back("n_pulses", std::to_string(n));
    meta.emplace_back("delay_pulses", std::to_string(delay_pulses));
    auto meta_par = meta, meta_cross = meta;
    meta_par.emplace_back("polarization", "parallel");
    meta_cross.emplace_back("polarization", "crossed");
    write_text_atomic(fs::path(cfg.out_dir) / ("fig" + id + "_hom_parallel.csv"),
                      histogram_csv(par, meta_par));
    write_text_atomic(fs::path(cfg.out_dir) / ("fig" + id + "_hom_crossed.csv"),
                      histogram_csv(crossed, meta_cross));

    Summary s = make_summary(id, cfg);
    s.add("n_pulses", std::to_string(n));
    s.add("delay_pulses", std::to_string(delay_pulses));
    s.add("separation_s", format_double(separation));
    s.add("visibility", value_pm(est.visibility, est.sigma));
    s.add("visibility_expected", fmt("%.6f", v_expected));
    write_summary(cfg, s);
    return kExitOk;
}

// ---- dataset 2c: visibility versus emission-time separation ----

int reproduce_2c(const RunConfig& cfg) {
    const std::int64_t n = pulses_or(cfg, 1'000'000);
    const double period = cfg.emitter.rep_period();
    const std::vector<double> deltas = {13e-9, 289e-9, 0.83e-6, 1.67e-6, 5.11e-6, 14.7e-6};

    // Monte Carlo points at the nearest whole pulse separations.
    std::string rows;
    for (double delta : deltas) {
        const auto k = std::max<std::int64_t>(1, std::llround(delta / period));
        if (n <= k) {
            std::fprintf(stderr, "violation: n_pulses must exceed delay_pulses (%lld <= %lld)\n",
                         static_cast<long long>(n), static_cast<long long>(k));
            return kExitInvalid;
        }
        HomConfig hc;
        hc.delay_pulses = k;
        const auto par = hom_monte_carlo(cfg.emitter, hc, n, cfg.seed, cfg.workers);
        hc.parallel_polarization = false;
        const auto crossed = hom_monte_carlo(cfg.emitter, hc, n, cfg.seed + 1, cfg.workers);
        const auto est = extract_visibility(par, crossed);
        const double sep = static_cast<double>(k) * period;
        rows += format_double(sep) + "," + format_double(est.visibility) + "," +
                format_double(est.sigma) + "," +
                format_double(visibility_vs_separation(cfg.emitter, sep)) + "\n";
    }
    auto meta = base_meta("2c", cfg);
    meta.emplace_back("n_pulses", std::to_string(n));
    write_text_atomic(fs::path(cfg.out_dir) / "fig2c_visibility.csv",
                      meta_block(meta) + "separation_s,visibility,visibility_err,expected\n" +
                          rows);

    // Dense model curve for plotting.
    std::string curve;
    for (int i = 0; i <= 150; ++i) {
        const double sep = 15e-6 * i / 150.0;
        curve += format_double(sep) + "," +
                 format_double(visibility_vs_separation(cfg.emitter, sep)) + "\n";
    }
    write_text_atomic(fs::path(cfg.out_dir) / "fig2c_visibility_curve.csv",
                      meta_block(base_meta("2c", cfg)) + "separation_s,visibility\n" + curve);

    // Plateau-plus-exponential fit of the model curve at the reference
    // separations.
    Dataset1D d;
    d.x = Eigen::Map<const Eigen::ArrayXd>(deltas.data(),
                                           static_cast<Eigen::Index>(deltas.size()));
    d.y.resize(d.x.size());
    for (Eigen::Index i = 0; i < d.x.size(); ++i)
        d.y[i] = visibility_vs_separation(cfg.emitter, d.x[i]);
    d.x_unit = "s";
    const FitResult fr = fit_visibility_decay(d);
    write_text_atomic(fs::path(cfg.out_dir) / "fig2c_fit_decay.csv",
                      fit_result_csv("visibility_decay", fr, base_meta("2c", cfg)));

    Summary s = make_summary("2c", cfg);
    s.add("n_pulses", std::to_string(n));
    s.add("plateau_computed", fmt("%.6f", visibility_vs_separation(cfg.emitter, 1.0)));
    s.add("plateau_reference_model", "0.90 +- 0.02");
    s.add("plateau_reference_measured", "0.921 +- 0.005");
    s.add("tau_d_us", value_pm(fr.params[2] * 1e6, fr.errors[2] * 1e6));
    s.add_block(fit_result_text("visibility_decay", fr));
    write_summary(cfg, s);
    return kExitOk;
}

// ---- dataset 3a: radiative decay histograms, on- and off-resonance ----

int reproduce_3a(const RunConfig& cfg) {
    const std::int64_t n = events_or(cfg, 1'000'000);
    Summary s = make_summary("3a", cfg);
    s.add("n_events", std::to_string(n));
    for (const bool detuned : {false, true}) {
        const char* which = detuned ? "detuned" : "resonant";
        const auto hist = lifetime_histogram(cfg.emitter, n, detuned, cfg.seed);
        const FitResult fr = fit_exponential(histogram_dataset(hist));

        auto meta = base_meta("3a", cfg);
        meta.emplace_back("n_events", std::to_string(n));
        meta.emplace_back("drive", which);
        write_text_atomic(fs::path(cfg.out_dir) / ("fig3a_lifetime_" + std::string(which) +
                                                   ".csv"),
                          histogram_csv(hist, meta));
        write_text_atomic(fs::path(cfg.out_dir) / ("fig3a_fit_" + std::string(which) + ".csv"),
                          fit_result_csv("exponential_decay", fr, meta));
        s.add(std::string("tau_") + which + "_ps",
              value_pm(fr.params[1] * 1e12, fr.errors[1] * 1e12));
    }
    write_summary(cfg, s);
    return kExitOk;
}

// ---- dataset 3b: field-interferometer fringe contrast versus imbalance ----

int reproduce_3b(const RunConfig& cfg) {
    Dataset1D d;
    d.x.resize(61);
    d.y.resize(61);
    for (int i = 0; i < 61; ++i) {
        d.x[i] = 10e-12 * i;
        d.y[i] = mz_fringe_contrast(cfg.emitter, d.x[i]);
    }
    d.x_unit = "s";
    const FitResult fr = fit_exponential(d);
    const double t2_eff = fr.params[1];
    const double ratio = t2_eff / (2.0 * cfg.emitter.t1);

    auto meta = base_meta("3b", cfg);
    write_text_atomic(fs::path(cfg.out_dir) / "fig3b_fringe_contrast.csv",
                      dataset_csv(d, "tau_s", "contrast", "", meta));
    write_text_atomic(fs::path(cfg.out_dir) / "fig3b_fit_exponential.csv",
                      fit_result_csv("exponential_decay", fr, meta));

    Summary s = make_summary("3b", cfg);
    s.add("t2_eff_ps", value_pm(t2_eff * 1e12, fr.errors[1] * 1e12));
    s.add("t2_eff_over_2t1", value_pm(ratio, fr.errors[1] / (2.0 * cfg.emitter.t1)));
    s.add_block(fit_result_text("exponential_decay", fr));
    write_summary(cfg, s);
    return kExitOk;
}

// ---- dataset 3c: scanning-cavity spectrum, lineshape fit, coherence ----

int reproduce_3c(const RunConfig& cfg) {
    const Spectrum line = emitter_spectrum(cfg.emitter);
    const Spectrum ideal = scan_spectrum(line, cfg.fp);

    Spectrum measured = ideal;
    const double amp = cfg.noise_fraction * ideal.intensity.maxCoeff();
    if (amp > 0.0) {
        Rng rng(derive_seed(cfg.seed, kSaltNoise, 0));
        for (Eigen::Index i = 0; i < measured.intensity.size(); ++i)
            measured.intensity[i] += amp * rng.normal();
    }

    Dataset1D d;
    d.x = measured.grid();
    d.y = measured.intensity;
    if (amp > 0.0) d.y_err = Eigen::ArrayXd::Constant(d.x.size(), amp);
    d.x_unit = "Hz";
    const FitResult fr = fit_voigt(d, cfg.fp.fwhm());
    const FitResult coh = coherence_time_from_spectrum(measured, &cfg.fp);

    auto meta = base_meta("3c", cfg);
    meta.emplace_back("noise_fraction", format_double(cfg.noise_fraction));
    meta.emplace_back("note", "fitted widths exclude the instrument's Lorentzian line");
    write_text_atomic(fs::path(cfg.out_dir) / "fig3c_spectrum.csv", spectrum_csv(measured, meta));
    write_text_atomic(fs::path(cfg.out_dir) / "fig3c_spectrum_ideal.csv",
                      spectrum_csv(ideal, base_meta("3c", cfg)));
    write_text_atomic(fs::path(cfg.out_dir) / "fig3c_fit_voigt.csv",
                      fit_result_csv("voigt_line", fr, meta));

    Summary s = make_summary("3c", cfg);
    s.add("note_widths", "fitted widths exclude the instrument's Lorentzian line");
    s.add("fwhm_lorentzian_GHz", value_pm(fr.params[2] / 1e9, fr.errors[2] / 1e9));
    s.add("fwhm_gaussian_GHz", value_pm(fr.params[3] / 1e9, fr.errors[3] / 1e9));
    s.add("t2_spectrum_ps", value_pm(coh.params[1] * 1e12, coh.errors[1] * 1e12));
    s.add_block(fit_result_text("voigt_line", fr));
    write_summary(cfg, s);
    return kExitOk;
}

}  // namespace

int run_reproduce(const std::string& dataset_id, const RunConfig& cfg) {
    static const std::set<std::string> known = {"1c", "1d", "2a", "2b", "2c", "3a", "3b", "3c"};
    if (!known.count(dataset_id)) {
        std::fprintf(stderr, "usage: unknown dataset id '%s' (expected 1c, 1d, 2a, 2b, 2c, 3a, "
                             "3b or 3c)\n",
                     dataset_id.c_str());
        return kExitUsage;
    }
    if (int rc = reject_if_invalid(cfg)) return rc;
    if (dataset_id == "1c") return reproduce_1c(cfg);
    if (dataset_id == "1d") return reproduce_1d(cfg);
    if (dataset_id == "2a") return reproduce_hom(cfg, "2a", 1);
    if (dataset_id == "2b") return reproduce_hom(cfg, "2b", cfg.delay_pulses);
    if (dataset_id == "2c") return reproduce_2c(cfg);
    if (dataset_id == "3a") return reproduce_3a(cfg);
    if (dataset_id == "3b") return reproduce_3b(cfg);
    return reproduce_3c(cfg);
}

int run_budget(const RunConfig& cfg) {
    if (int rc = reject_if_invalid(cfg)) return rc;
    const EmitterParams& e = cfg.emitter;
    const double excitation = e.rep_rate;
    const double emitted = excitation * e.p1;
    const double fiber = emitted * e.eta_fiber;
    const double detected = fiber * e.eta_det;
    std::printf("photon budget at the configured parameters (per second):\n");
    std::printf("  excitation rate          %s\n", fmt("%.6g", excitation).c_str());
    std::printf("  x p1 = %-10s        %s\n", fmt("%.4g", e.p1).c_str(),
                fmt("%.6g", emitted).c_str());
    std::printf("  x eta_fiber = %-10s %s\n", fmt("%.4g", e.eta_fiber).c_str(),
                fmt("%.6g", fiber).c_str());
    std::printf("  x eta_det = %-10s   %s\n", fmt("%.4g", e.eta_det).c_str(),
                fmt("%.6g", detected).c_str());
    return kExitOk;
}

int run_sweep(const std::string& param, const std::vector<double>& values,
              const std::string& metric, double separation, const RunConfig& cfg) {
    static const std::set<std::string> sweepable = {
        "t1",     "gamma_pd",  "t2_hom",       "sigma_omega", "tau_c",
        "omega_0", "rep_rate", "p1",           "p2",          "sigma_jitter",
        "eta_fiber", "eta_det", "purcell_ratio"};
    if (!sweepable.count(param)) {
        std::fprintf(stderr, "usage: unknown sweep parameter '%s'\n", param.c_str());
        return kExitUsage;
    }
    if (metric != "visibility" && metric != "g2" && metric != "t2_eff") {
        std::fprintf(stderr, "usage: unknown metric '%s' (expected visibility, g2 or t2_eff)\n",
                     metric.c_str());
        return kExitUsage;
    }
    if (values.empty()) {
        std::fprintf(stderr, "usage: sweep needs at least one value\n");
        return kExitUsage;
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            std::fprintf(stderr, "usage: sweep values must be finite\n");
            return kExitUsage;
        }
    }
    if (int rc = reject_if_invalid(cfg)) return rc;

    std::string rows;
    for (double value : values) {
        RunConfig point = cfg;
        char text[64];
        std::snprintf(text, sizeof(text), "%.17g", value);
        apply_key(point, param, text);
        const auto problems = config_violations(point);
        if (!problems.empty()) {
            for (const auto& p : problems)
                std::fprintf(stderr, "violation: %s = %s: %s\n", param.c_str(), text, p.c_str());
            return kExitInvalid;
        }
        double y = 0.0, err = 0.0;
        if (metric == "visibility") {
            y = visibility_vs_separation(point.emitter, separation);
        } else if (metric == "g2") {
            const std::int64_t n = pulses_or(point, 10'000'000);
            const auto est = g2_zero(hbt_histogram(point.emitter, n, point.seed, point.workers),
                                     point.emitter.rep_period());
            y = est.g2;
            err = est.sigma;
        } else {  // t2_eff
            Dataset1D d;
            d.x.resize(61);
            d.y.resize(61);
            for (int i = 0; i < 61; ++i) {
                d.x[i] = 10e-12 * i;
                d.y[i] = mz_fringe_contrast(point.emitter, d.x[i]);
            }
            const FitResult fr = fit_exponential(d);
            y = fr.params[1];
            err = fr.errors[1];
        }
        rows += format_double(value) + "," + format_double(y) + "," + format_double(err) + "\n";
    }

    auto meta = base_meta("sweep", cfg);
    meta.emplace_back("param", param);
    meta.emplace_back("metric", metric);
    if (metric == "visibility") meta.emplace_back("separation_s", format_double(separation));
    const std::string header = param + "," + metric + "," + metric + "_err\n";
    const fs::path file = fs::path(cfg.out_dir) / ("sweep_" + param + "_" + metric + ".csv");
    write_text_atomic(file, meta_block(meta) + header + rows);
    std::printf("wrote %s\n", file.string().c_str());
    return kExitOk;
}

int run_validate(const RunConfig& cfg) {
    const auto problems = config_violations(cfg);
    for (const auto& p : problems) std::printf("violation: %s\n", p.c_str());
    if (problems.empty()) std::printf("configuration valid\n");
    return problems.empty() ? kExitOk : kExitInvalid;
}

int run_simulate(const RunConfig& cfg) {
    if (int rc = reject_if_invalid(cfg)) return rc;
    const std::int64_t n = pulses_or(cfg, 100'000);
    const auto photons = generate_stream(cfg.emitter, n, cfg.seed);

    auto meta = base_meta("simulate", cfg);
    meta.emplace_back("n_pulses", std::to_string(n));
    meta.emplace_back("n_photons", std::to_string(photons.size()));
    std::string out = meta_block(meta) + "pulse_index,t_emit_ps,omega_rad_s,multiplicity\n";
    for (const auto& ph : photons) {
        const int multiplicity = ph.tag == Multiplicity::single ? 1 : 2;
        out += std::to_string(ph.pulse_index) + "," + fmt("%.6f", ph.t_emit * 1e12) + "," +
               format_double(ph.omega) + "," + std::to_string(multiplicity) + "\n";
    }
    write_text_atomic(fs::path(cfg.out_dir) / "stream.csv", out);
    return kExitOk;
}

}  // namespace rfsim
