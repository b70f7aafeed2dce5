#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rfsim/fitting.hpp"
#include "rfsim/histogram.hpp"
#include "rfsim/spectra.hpp"

namespace rfsim {

// Metadata rendered as `# key = value` comment lines ahead of the header row.
using MetaList = std::vector<std::pair<std::string, std::string>>;

std::string format_double(double v);  // %.10g, locale-independent
std::string meta_block(const MetaList& meta);

// `bin_center_ps,counts` table; centers in picoseconds, counts as integers.
std::string histogram_csv(const CoincidenceHistogram& hist, const MetaList& meta);

// `nu_GHz,intensity_per_GHz` table on the spectrum's uniform grid.
std::string spectrum_csv(const Spectrum& s, const MetaList& meta);

// Generic x/y[/err] table with caller-supplied column names.
std::string dataset_csv(const Dataset1D& d, const std::string& x_col, const std::string& y_col,
                        const std::string& err_col, const MetaList& meta);

// Human-readable block: one `name = value +- error` line per parameter, then
// chi-square and convergence information.
std::string fit_result_text(const std::string& model_name, const FitResult& fr);

// Machine form: one header and one data row; columns are
// model,<name>,<name>_err,...,chi2,chi2_reduced,converged,n_iterations.
std::string fit_result_csv(const std::string& model_name, const FitResult& fr,
                           const MetaList& meta);

// Writes through a temporary file in the target directory followed by an
// atomic rename, creating parent directories as needed; a failed write never
// leaves a partial target or a stray temporary behind.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// Reads a `nu_GHz,intensity_per_GHz` table back, skipping `#` comments. The
// grid must be uniform to 1e-9 relative step tolerance.
Spectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace rfsim
