#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "locfft/characterize.hpp"
#include "locfft/pca.hpp"

namespace locfft {

inline constexpr int kDefaultElemsize = 128;
inline constexpr int kDefaultStep = 64;
inline constexpr int kCanonicalWidth = 2048;

/// Every user-settable parameter of a run.
struct RunConfig {
  std::vector<std::string> inputs;  // paths or glob patterns
  int elemsize = kDefaultElemsize;
  int xstep = kDefaultStep;
  int ystep = kDefaultStep;
  bool rescale_2048 = false;
  std::optional<int> components;  // overrides auto_k when set
  int n_scree = kDefaultScreeComponents;
  bool scree_smooth = false;
  int max_iter = 200;
  double tol = 1e-4;
  std::optional<double> pixel_size_nm;  // overrides any size stored in the file
  double dc_exclusion = kDefaultDcExclusion;
  double isotropy_threshold = kDefaultIsotropyThreshold;
  std::filesystem::path out_dir = "locfft_out";
  std::vector<int> sweep;
  int threads = 0;  // 0: one per available core
};

/// Throws ParameterError naming the first out-of-range field.
void validate(const RunConfig& cfg);

}  // namespace locfft
