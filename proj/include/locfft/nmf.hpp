#pragma once

#include <vector>

#include "locfft/linalg.hpp"
#include "locfft/matrix.hpp"
#include "locfft/window_fft.hpp"

namespace locfft {

struct NmfOptions {
  int max_iter = 200;
  double tol = 1e-4;     // stop once the relative objective decrease falls below this
  double eps = 1e-12;    // guards the multiplicative-update denominators
  // Solver for the initial SVD. Automatic uses the exact SVD only for small
  // matrices; the few leading triplets NNDSVD needs come cheaply from Krylov.
  linalg::SvdMethod init_method = linalg::SvdMethod::Automatic;
};

/// X ~= W H with W, H >= 0.
struct Decomposition {
  int k = 0;
  RowMatrix W;  // n_windows x k, spatial loadings
  RowMatrix H;  // k x d, spectral factors
  std::vector<double> objective_trace;  // 0.5 ||X - WH||_F^2; [0] is the initial value
  int iterations_run = 0;
  bool converged = false;
};

struct NmfInit {
  RowMatrix W;
  RowMatrix H;
};

/// NNDSVDa: non-negative parts of the leading singular triplets, with exact
/// zeros replaced by the mean of X so that multiplicative updates can move them.
NmfInit nndsvd_init(const RowMatrix& X, int k,
                    linalg::SvdMethod method = linalg::SvdMethod::Automatic);

/// Lee-Seung multiplicative updates for the Frobenius objective, started from
/// nndsvd_init. Each iteration updates H, then W. The W update, the next
/// W^T X product and the objective share one pass over X, parallel over a
/// fixed set of row slabs so results do not depend on the thread count.
Decomposition nmf_fit(const RowMatrix& X, int k, const NmfOptions& opts = {});

/// Textbook serial implementation of the same iteration (separate W^T X and
/// X H^T products, direct residual objective). Kept as a test oracle.
Decomposition nmf_fit_reference(const RowMatrix& X, int k, const NmfOptions& opts = {});

/// Same iteration from a caller-supplied starting point.
Decomposition nmf_iterate(const RowMatrix& X, NmfInit init, const NmfOptions& opts);
Decomposition nmf_iterate_reference(const RowMatrix& X, NmfInit init, const NmfOptions& opts);

/// ||W_j||^2 * ||H_j||^2 per component.
std::vector<double> component_energy(const Decomposition& dec);

/// Sorts components by descending energy (stable). W H is unchanged.
Decomposition order_components(Decomposition dec);

/// Loadings as ny x nx maps and factors as side x side spectra.
struct ComponentImages {
  std::vector<RowMatrix> maps;
  std::vector<RowMatrix> factors;
};

ComponentImages reshape_outputs(const Decomposition& dec, const WindowGrid& grid);

}  // namespace locfft
