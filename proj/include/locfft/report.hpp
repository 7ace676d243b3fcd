#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "locfft/characterize.hpp"
#include "locfft/config.hpp"
#include "locfft/matrix.hpp"

namespace locfft {

/// Version string written into every report.
const char* tool_version();

struct ComponentReport {
  int index = 0;  // 1-based, in output order
  double energy = 0.0;
  std::optional<PeakInfo> peak;  // empty when the factor has no off-centre signal
  std::string peak_error;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Everything a run produced, as written to report.json. Plots and the HTML
/// page are rendered from this structure only.
struct RunReport {
  std::string tool_version;
  std::string input_path;
  int input_width = 0;
  int input_height = 0;
  int analysed_width = 0;
  int analysed_height = 0;
  std::optional<double> pixel_size_nm;
  std::string pixel_size_source = "none";  // "flag", "file" or "none"
  RunConfig config;

  int grid_nx = 0;
  int grid_ny = 0;
  int n_windows = 0;

  std::vector<double> variance_ratio;
  std::vector<int> candidates;
  int auto_k = 1;
  bool auto_k_fallback = false;
  bool pca_exact = true;

  int k = 0;
  std::string k_source;  // "auto" or "override"

  int nmf_iterations = 0;
  bool nmf_converged = false;
  std::vector<double> objective_trace;

  std::vector<ComponentReport> components;
  std::vector<SweepRow> sweep;
  std::vector<StageTiming> timings;
};

/// Report fields that legitimately differ between identical runs.
const std::vector<std::string>& volatile_report_fields();

/// Annotation shared by the panels, the HTML page and the tests, e.g.
/// "r = 16.00 bins, angle = 90.0 deg, spacing = 8.00 px / 14.44 nm".
std::string format_peak(const std::optional<PeakInfo>& peak);

/// Formats a spacing in nm, or "n/a" without a pixel size.
std::string format_spacing_nm(const std::optional<double>& nm);

std::string report_json(const RunReport& report);

/// Multi-page float32 TIFF, one page per image, in order.
void write_tiff_stack(const std::vector<RowMatrix>& images, const std::filesystem::path& path);

/// Reads a stack written by write_tiff_stack (or any float TIFF) back as pages.
std::vector<RowMatrix> read_tiff_stack(const std::filesystem::path& path);

/// Writes report.json and report.html into `dir`. The HTML embeds scree.png,
/// component_NN.png and sweep.png from `dir` when they exist.
void write_report(const RunReport& report, const std::filesystem::path& dir);

/// sweep.csv: elemsize, n_windows, auto_k, candidates, status.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

struct BatchEntry {
  std::string input;
  std::string report_dir;  // relative to the index page; empty on failure
  bool ok = false;
  int exit_code = 0;  // as for a single run: 1 input/usage, 2 numerical
  int k = 0;
  double seconds = 0.0;
  std::string error;
};

/// index.html linking each per-input report.
void write_batch_index(const std::vector<BatchEntry>& entries, const std::filesystem::path& path);

}  // namespace locfft
