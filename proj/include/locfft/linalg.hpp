#pragma once

#include <cstdint>
#include <optional>

#include "locfft/matrix.hpp"

namespace locfft::linalg {

/// Thin singular value decomposition A = U diag(s) V^T, s descending.
struct Svd {
  Vector s;  // all computed singular values
  Matrix u;  // rows(A) x r, leading left singular vectors
  Matrix v;  // cols(A) x r, leading right singular vectors
};

enum class SvdMethod {
  Automatic,  // Exact when affordable, else Krylov
  Exact,      // Householder QR of the long side, then divide-and-conquer SVD
  Krylov,     // deterministic randomized block Krylov (truncated)
};

/// Options for the truncated Krylov solver.
struct KrylovOptions {
  int oversample = 10;
  int depth = 6;  // number of A A^T applications after the first block
  std::uint64_t seed = 0x6c6f636666742ull;
};

/// SVD of A = X - 1 * center^T (or of X when `center` is empty), returning the
/// leading `rank` singular vectors. The exact method returns every singular
/// value; the Krylov method returns `rank` of them.
Svd svd(const RowMatrix& X, const std::optional<Vector>& center, int rank,
        SvdMethod method = SvdMethod::Automatic, const KrylovOptions& opts = {});

/// True when the exact method on an n x d matrix stays within a fixed flop budget.
bool exact_svd_affordable(Eigen::Index n, Eigen::Index d);

/// Squared Frobenius norm of X - 1 * center^T, summed row by row.
double centered_frobenius2(const RowMatrix& X, const Vector& center);

/// Column means of X.
Vector column_means(const RowMatrix& X);

/// Flips each singular pair so the largest-magnitude entry of v is positive.
void fix_signs(Svd& result);

}  // namespace locfft::linalg
