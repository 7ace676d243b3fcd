#pragma once

#include <span>
#include <string>
#include <vector>

#include "locfft/linalg.hpp"
#include "locfft/matrix.hpp"
#include "locfft/window_fft.hpp"

namespace locfft {

inline constexpr int kDefaultScreeComponents = 30;

struct PcaOptions {
  int n_keep = kDefaultScreeComponents;
  linalg::SvdMethod method = linalg::SvdMethod::Automatic;
  bool smooth_scree = false;  // 3-point moving average of log10 ratios before differencing
};

/// Result of PCA on a spectrum stack, with scree-plot elbow candidates.
struct ScreeData {
  int n_computed = 0;
  std::vector<double> variance_ratio;  // descending, each > 0
  Vector mean;                         // column means of X
  Matrix axes;                         // n_computed x d, orthonormal rows
  std::vector<int> candidates;         // ascending component counts
  int auto_k = 1;
  bool auto_k_fallback = false;  // no candidate found; auto_k defaulted to 1
  double total_variance = 0.0;   // squared Frobenius norm of the centred data
  bool exact = true;             // false when the truncated Krylov solver was used
};

/// Centres the columns of X and keeps the leading `n_keep` principal axes.
/// Ratios are s_i^2 over the total centred variance. Each axis is signed so its
/// largest-magnitude entry is positive.
ScreeData fit_pca(const RowMatrix& X, const PcaOptions& opts = {});
inline ScreeData fit_pca(const SpectrumStack& stack, const PcaOptions& opts = {}) {
  return fit_pca(stack.X, opts);
}

/// Local maxima of the gradient of the log10 scree. A maximum at gap j (between
/// components j and j+1, 1-based) yields candidate j; j ranges over [2, m-2],
/// plateaus count once at their first index. Fewer than 3 ratios give no
/// candidates.
std::vector<int> scree_candidates(std::span<const double> variance_ratio, bool smooth = false);

struct AutoK {
  int k = 1;
  bool fallback = false;
};

/// Smallest candidate, or 1 with `fallback` set when there is none.
AutoK auto_k(std::span<const int> candidates);
inline AutoK auto_k(const ScreeData& scree) { return auto_k(scree.candidates); }

}  // namespace locfft
