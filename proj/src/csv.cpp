#include "rfsim/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace rfsim {

namespace {

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

[[noreturn]] void fail_read(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error("csv: " + path.string() + ": " + what);
}

}  // namespace

std::string format_double(double v) { return format("%.10g", v); }

std::string meta_block(const MetaList& meta) {
    std::string out;
    for (const auto& [key, value] : meta) out += "# " + key + " = " + value + "\n";
    return out;
}

std::string histogram_csv(const CoincidenceHistogram& hist, const MetaList& meta) {
    std::string out = meta_block(meta);
    out += "# bin_width_ps = " + format("%.6f", hist.bin_width * 1e12) + "\n";
    out += "# n_events_processed = " + std::to_string(hist.n_events_processed) + "\n";
    out += "bin_center_ps,counts\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double center = hist.t_min + (static_cast<double>(i) + 0.5) * hist.bin_width;
        out += format("%.6f", center * 1e12);
        out += ",";
        out += format("%.0f", hist.counts[i]);
        out += "\n";
    }
    return out;
}

std::string spectrum_csv(const Spectrum& s, const MetaList& meta) {
    std::string out = meta_block(meta);
    out += "nu_GHz,intensity_per_GHz\n";
    for (int i = 0; i < s.n(); ++i) {
        out += format("%.9f", s.nu(i) / 1e9);
        out += ",";
        out += format("%.10g", s.intensity[i] * 1e9);
        out += "\n";
    }
    return out;
}

std::string dataset_csv(const Dataset1D& d, const std::string& x_col, const std::string& y_col,
                        const std::string& err_col, const MetaList& meta) {
    const bool with_err = d.has_errors();
    std::string out = meta_block(meta);
    out += x_col + "," + y_col;
    if (with_err) out += "," + err_col;
    out += "\n";
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        out += format_double(d.x[i]) + "," + format_double(d.y[i]);
        if (with_err) out += "," + format_double(d.y_err[i]);
        out += "\n";
    }
    return out;
}

std::string fit_result_text(const std::string& model_name, const FitResult& fr) {
    std::ostringstream out;
    out << "[fit " << model_name << "]\n";
    out << "converged = " << (fr.converged ? "yes" : "no") << "\n";
    out << "n_iterations = " << fr.n_iterations << "\n";
    for (Eigen::Index i = 0; i < fr.params.size(); ++i) {
        const std::string name = i < static_cast<Eigen::Index>(fr.param_names.size())
                                     ? fr.param_names[static_cast<std::size_t>(i)]
                                     : "p" + std::to_string(i);
        out << name << " = " << format("%.6g", fr.params[i]) << " +- "
            << format("%.3g", fr.errors[i]) << "\n";
    }
    out << "chi2 = " << format("%.6g", fr.chi2) << "\n";
    out << "chi2_reduced = " << format("%.6g", fr.chi2_reduced) << "\n";
    return out.str();
}

std::string fit_result_csv(const std::string& model_name, const FitResult& fr,
                           const MetaList& meta) {
    std::string header = "model";
    std::string row = model_name;
    for (Eigen::Index i = 0; i < fr.params.size(); ++i) {
        const std::string name = i < static_cast<Eigen::Index>(fr.param_names.size())
                                     ? fr.param_names[static_cast<std::size_t>(i)]
                                     : "p" + std::to_string(i);
        header += "," + name + "," + name + "_err";
        row += "," + format_double(fr.params[i]) + "," + format_double(fr.errors[i]);
    }
    header += ",chi2,chi2_reduced,converged,n_iterations";
    row += "," + format_double(fr.chi2) + "," + format_double(fr.chi2_reduced) + "," +
           (fr.converged ? std::string("1") : std::string("0")) + "," +
           std::to_string(fr.n_iterations);
    return meta_block(meta) + header + "\n" + row + "\n";
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (out.good()) out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out.good()) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw std::runtime_error("csv: cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw std::runtime_error("csv: cannot rename " + tmp.string() + ": " + ec.message());
    }
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good()) fail_read(path, "cannot open");
    std::string line;
    bool header_seen = false;
    std::vector<double> nu, intensity;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "nu_GHz,intensity_per_GHz")
                fail_read(path, "unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail_read(path, "malformed row '" + line + "'");
        try {
            std::size_t used = 0;
            const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
            const double x = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument(a);
            const double y = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument(b);
            nu.push_back(x * 1e9);
            intensity.push_back(y / 1e9);
        } catch (const std::exception&) {
            fail_read(path, "malformed row '" + line + "'");
        }
    }
    if (!header_seen) fail_read(path, "missing header");
    if (nu.size() < 2) fail_read(path, "fewer than two grid points");

    const double step = (nu.back() - nu.front()) / static_cast<double>(nu.size() - 1);
    if (!(step > 0.0)) fail_read(path, "grid is not increasing");
    for (std::size_t i = 1; i < nu.size(); ++i) {
        const double gap = nu[i] - nu[i - 1];
        if (std::abs(gap - step) > 1e-9 * step + 1e-12)
            fail_read(path, "grid is not uniform at row " + std::to_string(i));
    }

    Spectrum s;
    s.nu_min = nu.front();
    s.step = step;
    s.intensity = Eigen::Map<const Eigen::ArrayXd>(intensity.data(),
                                                   static_cast<Eigen::Index>(intensity.size()));
    return s;
}

}  // namespace rfsim
