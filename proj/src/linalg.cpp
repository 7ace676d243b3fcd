#include "locfft/linalg.hpp"

#include <algorithm>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "locfft/errors.hpp"

namespace locfft::linalg {
namespace {

// Orthonormal basis of the column space of M (thin Householder Q).
Matrix orthonormalize(Matrix M) {
  const Eigen::Index cols = std::min(M.rows(), M.cols());
  Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(M);
  Matrix Q = Matrix::Identity(M.rows(), cols);
  Q.applyOnTheLeft(qr.householderQ());
  return Q;
}

// SVD of a tall (rows >= cols) matrix T held column-major, via QR then a
// divide-and-conquer SVD of the triangular factor. Returns T = L diag(s) R^T
// with L = Q * U_R (only `want` columns formed) and R = V_R (all columns).
struct TallSvd {
  Vector s;
  Matrix left;   // rows(T) x want
  Matrix right;  // cols(T) x cols(T)
};

TallSvd tall_svd(Eigen::Ref<Matrix> T, Eigen::Index want) {
  const Eigen::Index m = T.cols();
  Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(T);
  Matrix R = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<Matrix> sv(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  TallSvd out;
  out.s = sv.singularValues();
  out.right = sv.matrixV();
  Matrix pad = Matrix::Zero(T.rows(), want);
  pad.topRows(m) = sv.matrixU().leftCols(want);
  pad.applyOnTheLeft(qr.householderQ());
  out.left = std::move(pad);
  return out;
}

Svd exact(const RowMatrix& X, const std::optional<Vector>& center, int rank) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const Eigen::Index want = std::min<Eigen::Index>(rank, std::min(n, d));
  Svd out;
  if (n <= d) {
    // A row-major n x d buffer is a column-major d x n buffer: A^T for free.
    Matrix At = Eigen::Map<const Matrix>(X.data(), d, n);
    if (center) At.colwise() -= *center;
    // A^T = Q U S V^T  =>  A = V S (Q U)^T
    TallSvd t = tall_svd(At, want);
    out.s = std::move(t.s);
    out.u = t.right.leftCols(want);
    out.v = std::move(t.left);
  } else {
    Matrix A = X;
    if (center) A.rowwise() -= center->transpose();
    TallSvd t = tall_svd(A, want);
    out.s = std::move(t.s);
    out.u = std::move(t.left);
    out.v = t.right.leftCols(want);
  }
  return out;
}

Svd krylov(const RowMatrix& X, const std::optional<Vector>& center, int rank, const KrylovOptions& opts) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const Eigen::Index limit = std::min(n, d);
  const Eigen::Index want = std::min<Eigen::Index>(rank, limit);
  const Eigen::Index block = std::min<Eigen::Index>(want + opts.oversample, limit);

  // A M and A^T N for A = X - 1 c^T, without forming A.
  auto apply = [&](const Matrix& M) {
    Matrix Y = X * M;
    if (center) Y.rowwise() -= center->transpose() * M;
    return Y;
  };
  auto apply_t = [&](const Matrix& N) {
    Matrix Z = X.transpose() * N;
    if (center) Z -= *center * N.colwise().sum();
    return Z;
  };

  std::mt19937_64 rng(opts.seed);
  Matrix omega(d, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      omega(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    }
  }

  const Eigen::Index max_cols = std::min<Eigen::Index>(block * (opts.depth + 1), limit);
  Matrix krylov(n, max_cols);
  Matrix q = orthonormalize(apply(omega));
  Eigen::Index filled = 0;
  for (int level = 0;; ++level) {
    const Eigen::Index take = std::min(q.cols(), max_cols - filled);
    krylov.middleCols(filled, take) = q.leftCols(take);
    filled += take;
    if (level == opts.depth || filled == max_cols) break;
    q = orthonormalize(apply(apply_t(q)));
  }
  const Matrix basis = orthonormalize(krylov.leftCols(filled));

  // B = basis^T A; SVD through its transpose, which is tall.
  Matrix Bt = apply_t(basis);  // d x filled
  TallSvd t = tall_svd(Bt, want);
  Svd out;
  out.s = t.s.head(want);
  out.u = basis * t.right.leftCols(want);
  out.v = std::move(t.left);
  return out;
}

}  // namespace

bool exact_svd_affordable(Eigen::Index n, Eigen::Index d) {
  const double lo = static_cast<double>(std::min(n, d));
  const double hi = static_cast<double>(std::max(n, d));
  return lo * lo * hi <= 3.0e10;
}

Svd svd(const RowMatrix& X, const std::optional<Vector>& center, int rank, SvdMethod method,
        const KrylovOptions& opts) {
  if (X.rows() < 1 || X.cols() < 1) throw ParameterError("svd: empty matrix");
  if (rank < 1) throw ParameterError("svd: rank must be >= 1");
  if (center && center->size() != X.cols()) throw GeometryError("svd: centre length mismatch");
  if (method == SvdMethod::Automatic) {
    method = exact_svd_affordable(X.rows(), X.cols()) ? SvdMethod::Exact : SvdMethod::Krylov;
  }
  return method == SvdMethod::Exact ? exact(X, center, rank) : krylov(X, center, rank, opts);
}

double centered_frobenius2(const RowMatrix& X, const Vector& center) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    total += (X.row(i) - center.transpose()).squaredNorm();
  }
  return total;
}

Vector column_means(const RowMatrix& X) {
  Vector mean = Vector::Zero(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) mean += X.row(i).transpose();
  return mean / static_cast<double>(X.rows());
}

void fix_signs(Svd& result) {
  for (Eigen::Index j = 0; j < result.v.cols(); ++j) {
    Eigen::Index idx;
    result.v.col(j).cwiseAbs().maxCoeff(&idx);
    if (result.v(idx, j) < 0.0) {
      result.v.col(j) *= -1.0;
      if (j < result.u.cols()) result.u.col(j) *= -1.0;
    }
  }
}

}  // namespace locfft::linalg
