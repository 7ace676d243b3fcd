#include "locfft/pca.hpp"

#include <cmath>
#include <limits>

#include "locfft/errors.hpp"

namespace locfft {

ScreeData fit_pca(const RowMatrix& X, const PcaOptions& opts) {
  if (opts.n_keep < 1) throw ParameterError("n_keep must be >= 1");
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n < 2) {
    throw InsufficientDataError("PCA needs at least 2 windows, got " + std::to_string(n));
  }

  ScreeData out;
  out.mean = linalg::column_means(X);
  const Eigen::Index max_rank = std::min(n - 1, d);
  const int want = static_cast<int>(std::min<Eigen::Index>(opts.n_keep, max_rank));

  linalg::SvdMethod method = opts.method;
  if (method == linalg::SvdMethod::Automatic) {
    method = linalg::exact_svd_affordable(n, d) ? linalg::SvdMethod::Exact : linalg::SvdMethod::Krylov;
  }
  out.exact = method == linalg::SvdMethod::Exact;

  linalg::Svd svd = linalg::svd(X, out.mean, want, method);
  linalg::fix_signs(svd);

  out.total_variance = out.exact ? svd.s.squaredNorm() : linalg::centered_frobenius2(X, out.mean);
  const double s_max = svd.s.size() ? svd.s(0) : 0.0;
  const double cutoff = s_max * static_cast<double>(std::max(n, d)) * std::numeric_limits<double>::epsilon();

  int kept = 0;
  if (out.total_variance > 0.0) {
    while (kept < want && kept < svd.s.size() && svd.s(kept) > cutoff) {
      const double s = svd.s(kept);
      out.variance_ratio.push_back(s * s / out.total_variance);
      ++kept;
    }
  }
  out.n_computed = kept;
  out.axes = svd.v.leftCols(kept).transpose();
  out.candidates = scree_candidates(out.variance_ratio, opts.smooth_scree);
  const AutoK k = auto_k(out.candidates);
  out.auto_k = k.k;
  out.auto_k_fallback = k.fallback;
  return out;
}

std::vector<int> scree_candidates(std::span<const double> variance_ratio, bool smooth) {
  const int m = static_cast<int>(variance_ratio.size());
  std::vector<int> out;
  if (m < 3) return out;

  std::vector<double> L(m);
  for (int j = 0; j < m; ++j) L[j] = std::log10(variance_ratio[j]);
  if (smooth) {
    std::vector<double> s(m);
    for (int j = 0; j < m; ++j) {
      const int lo = std::max(0, j - 1), hi = std::min(m - 1, j + 1);
      double acc = 0.0;
      for (int i = lo; i <= hi; ++i) acc += L[i];
      s[j] = acc / (hi - lo + 1);
    }
    L = std::move(s);
  }

  // g[j] for gap j = 1..m-1 (1-based), stored at g[j].
  std::vector<double> g(m);
  for (int j = 1; j <= m - 1; ++j) g[j] = L[j] - L[j - 1];
  for (int j = 2; j <= m - 2; ++j) {
    if (g[j] > g[j - 1] && g[j] >= g[j + 1]) out.push_back(j);
  }
  return out;
}

AutoK auto_k(std::span<const int> candidates) {
  if (candidates.empty()) return {1, true};
  return {*std::min_element(candidates.begin(), candidates.end()), false};
}

}  // namespace locfft
