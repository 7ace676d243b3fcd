#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "locfft/config.hpp"
#include "locfft/errors.hpp"
#include "locfft/report.hpp"

namespace locfft {

/// A run aborted in a named stage. exit_code is 2 for numerical failure, else 1.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message, int exit_code)
      : Error(stage + ": " + message), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

/// Process exit code for an error that ended a run: 2 for numerical failure,
/// 1 for everything else (bad input, bad parameters, I/O).
int exit_code_for(const std::exception& e) noexcept;

/// load -> rescale -> grid -> spectra -> PCA -> k -> NMF -> order -> characterize
/// -> write. Outputs go to `out_dir`, which is created if missing.
RunReport run_single(const RunConfig& cfg, const std::filesystem::path& input,
                     const std::filesystem::path& out_dir);

/// Same, writing to cfg.out_dir / <input stem>.
RunReport run_single(const RunConfig& cfg, const std::filesystem::path& input);

/// Expands each entry of cfg.inputs: an existing path is taken as is, anything
/// else as a glob pattern. Throws ParameterError when an entry matches nothing.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns);

/// Output directory names for `inputs`: the file stem, suffixed _2, _3, ... on clashes.
std::vector<std::string> report_dir_names(const std::vector<std::filesystem::path>& inputs);

struct BatchSummary {
  std::vector<BatchEntry> entries;  // in input order
  int exit_code = 0;                // 0 iff every input succeeded
};

/// Processes every input independently, up to the configured parallelism at
/// once, and writes <out>/index.html. One failing input does not stop the others.
BatchSummary run_batch(const RunConfig& cfg);

/// Resolved worker count: cfg.threads, or the number of processors when 0.
int resolved_threads(const RunConfig& cfg);

}  // namespace locfft
