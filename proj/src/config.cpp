#include "rfsim/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rfsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: bad numeric value for " + key + ": '" + value + "'");
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: bad integer value for " + key + ": '" + value + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used == value.size() && value.find('-') == std::string::npos) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: bad unsigned value for " + key + ": '" + value + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    EmitterParams& e = cfg.emitter;
    if (key == "t1") e.t1 = parse_double(key, value);
    else if (key == "gamma_pd") e.gamma_pd = parse_double(key, value);
    else if (key == "t2_hom") {
        const double t2 = parse_double(key, value);
        if (!(t2 > 0.0)) throw std::invalid_argument("config: t2_hom must be > 0");
        e.gamma_pd = 1.0 / t2 - 0.5 / e.t1;
    } else if (key == "sigma_omega") e.sigma_omega = parse_double(key, value);
    else if (key == "tau_c") e.tau_c = parse_double(key, value);
    else if (key == "omega_0") e.omega_0 = parse_double(key, value);
    else if (key == "rep_rate") e.rep_rate = parse_double(key, value);
    else if (key == "p1") e.p1 = parse_double(key, value);
    else if (key == "p2") e.p2 = parse_double(key, value);
    else if (key == "sigma_jitter") e.sigma_jitter = parse_double(key, value);
    else if (key == "eta_fiber") e.eta_fiber = parse_double(key, value);
    else if (key == "eta_det") e.eta_det = parse_double(key, value);
    else if (key == "purcell_ratio") e.purcell_ratio = parse_double(key, value);
    else if (key == "finesse") cfg.fp.finesse = parse_double(key, value);
    else if (key == "fsr") cfg.fp.fsr = parse_double(key, value);
    else if (key == "peak_transmission") cfg.fp.peak_transmission = parse_double(key, value);
    else if (key == "n_pulses") cfg.n_pulses = parse_int(key, value);
    else if (key == "n_events") cfg.n_events = parse_int(key, value);
    else if (key == "delay_pulses") cfg.delay_pulses = parse_int(key, value);
    else if (key == "pump_power_pi") cfg.pump_power_pi = parse_double(key, value);
    else if (key == "noise_fraction") cfg.noise_fraction = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_uint(key, value);
    else if (key == "out_dir") {
        if (value.empty()) throw std::invalid_argument("config: out_dir must not be empty");
        cfg.out_dir = value;
    } else if (key == "workers") cfg.workers = static_cast<int>(parse_int(key, value));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good()) throw std::runtime_error("config: cannot open " + path.string());
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: " + path.string() + ":" +
                                        std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: " + path.string() + ":" +
                                        std::to_string(line_no) + ": empty key");
        apply_key(cfg, key, value);
    }
    return cfg;
}

std::vector<std::string> config_violations(const RunConfig& cfg) {
    std::vector<std::string> problems = cfg.emitter.validate();
    for (auto& p : cfg.fp.validate()) problems.push_back(p);
    auto require = [&](bool ok, const char* msg) {
        if (!ok) problems.emplace_back(msg);
    };
    require(cfg.n_pulses >= 0, "n_pulses must be >= 0 (0 selects the per-task default)");
    require(cfg.n_events >= 0, "n_events must be >= 0 (0 selects the per-task default)");
    require(cfg.delay_pulses >= 1, "delay_pulses must be >= 1");
    require(std::isfinite(cfg.pump_power_pi) && cfg.pump_power_pi > 0.0,
            "pump_power_pi must be finite and > 0");
    require(std::isfinite(cfg.noise_fraction) && cfg.noise_fraction >= 0.0 &&
                cfg.noise_fraction < 1.0,
            "noise_fraction must be in [0, 1)");
    require(!cfg.out_dir.empty(), "out_dir must not be empty");
    require(cfg.workers >= 1, "workers must be >= 1");
    return problems;
}

std::string serialize_config(const RunConfig& cfg) {
    const EmitterParams& e = cfg.emitter;
    std::string out;
    auto add = [&](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += "\n";
    };
    add("t1", fmt_double(e.t1));
    add("gamma_pd", fmt_double(e.gamma_pd));
    add("sigma_omega", fmt_double(e.sigma_omega));
    add("tau_c", fmt_double(e.tau_c));
    add("omega_0", fmt_double(e.omega_0));
    add("rep_rate", fmt_double(e.rep_rate));
    add("p1", fmt_double(e.p1));
    add("p2", fmt_double(e.p2));
    add("sigma_jitter", fmt_double(e.sigma_jitter));
    add("eta_fiber", fmt_double(e.eta_fiber));
    add("eta_det", fmt_double(e.eta_det));
    add("purcell_ratio", fmt_double(e.purcell_ratio));
    add("finesse", fmt_double(cfg.fp.finesse));
    add("fsr", fmt_double(cfg.fp.fsr));
    add("peak_transmission", fmt_double(cfg.fp.peak_transmission));
    add("n_pulses", std::to_string(cfg.n_pulses));
    add("n_events", std::to_string(cfg.n_events));
    add("delay_pulses", std::to_string(cfg.delay_pulses));
    add("pump_power_pi", fmt_double(cfg.pump_power_pi));
    add("noise_fraction", fmt_double(cfg.noise_fraction));
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string text = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash_hex(const RunConfig& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

}  // namespace rfsim
