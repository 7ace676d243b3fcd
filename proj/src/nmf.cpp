#include "locfft/nmf.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

#include "locfft/errors.hpp"

namespace locfft {
namespace {

// Row slabs are fixed by the data size, not by the thread count, and partial
// sums are combined in slab order; that keeps nmf_fit bit-identical for any
// number of threads.
constexpr int kSlabs = 16;
// Rows per tile and columns per chunk: a tile of X stays in cache between the
// W update and the accumulation sweep.
constexpr int kTileRows = 32;
constexpr Eigen::Index kChunk = 1024;

struct SlabRange {
  Eigen::Index begin, end;
};

std::vector<SlabRange> make_slabs(Eigen::Index n) {
  const Eigen::Index count = std::min<Eigen::Index>(kSlabs, n);
  std::vector<SlabRange> slabs(count);
  for (Eigen::Index s = 0; s < count; ++s) slabs[s] = {n * s / count, n * (s + 1) / count};
  return slabs;
}

void check_input(const RowMatrix& X, int k) {
  if (k < 1) throw ParameterError("NMF component count must be >= 1");
  if (X.rows() < 1 || X.cols() < 1) throw ParameterError("NMF input matrix is empty");
  if (k > std::min(X.rows(), X.cols())) {
    throw ParameterError("NMF component count " + std::to_string(k) + " exceeds min(rows, cols) = " +
                         std::to_string(std::min(X.rows(), X.cols())));
  }
  if (!X.allFinite()) throw ParameterError("NMF input contains non-finite values");
  if (X.minCoeff() < 0.0) throw ParameterError("NMF input must be non-negative");
}

double reference_objective(const RowMatrix& X, const RowMatrix& W, const RowMatrix& H) {
  double acc = 0.0;
  Eigen::RowVectorXd buf(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    buf.noalias() = W.row(i) * H;
    acc += (X.row(i) - buf).squaredNorm();
  }
  return 0.5 * acc;
}

// One sweep over X. When `update` is set, each row of W gets its
// multiplicative update first. Then, for the resulting W, accumulates W^T X,
// W^T W and the residual 0.5 ||X - W H||^2. The residual is summed directly:
// the expanded form ||X||^2 - 2 <X, WH> + ||WH||^2 cancels catastrophically
// when a strong DC peak dominates ||X||.
struct PassSums {
  RowMatrix wtx;
  Matrix wtw;
  double objective = 0.0;
};

class FusedPass {
 public:
  FusedPass(const RowMatrix& X, int k) : X_(X), slabs_(make_slabs(X.rows())), partial_(slabs_.size()) {
    for (auto& p : partial_) {
      p.wtx.resize(k, X.cols());
      p.wtw.resize(k, k);
    }
  }

  PassSums run(RowMatrix& W, const RowMatrix& H, const Matrix& hht, double eps, bool update) {
    const int n_slabs = static_cast<int>(slabs_.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < n_slabs; ++s) slab(s, W, H, hht, eps, update);

    PassSums total;
    total.wtx = partial_.front().wtx;
    total.wtw = partial_.front().wtw;
    total.objective = partial_.front().objective;
    for (std::size_t s = 1; s < partial_.size(); ++s) {
      total.wtx += partial_[s].wtx;
      total.wtw += partial_[s].wtw;
      total.objective += partial_[s].objective;
    }
    total.objective *= 0.5;
    return total;
  }

 private:
  void slab(int s, RowMatrix& W, const RowMatrix& H, const Matrix& hht, double eps, bool update) {
    const Eigen::Index k = W.cols(), d = X_.cols();
    PassSums& acc = partial_[s];
    acc.wtx.setZero();
    acc.wtw.setZero();
    acc.objective = 0.0;
    RowMatrix xh(kTileRows, k), denom(kTileRows, k), r(kTileRows, kChunk);
    for (Eigen::Index t = slabs_[s].begin; t < slabs_[s].end; t += kTileRows) {
      const Eigen::Index rows = std::min<Eigen::Index>(kTileRows, slabs_[s].end - t);
      const auto Xt = X_.middleRows(t, rows);
      auto Wt = W.middleRows(t, rows);
      if (update) {
        auto xht = xh.topRows(rows);
        auto dt = denom.topRows(rows);
        xht.noalias() = Xt * H.transpose();
        dt.noalias() = Wt * hht;
        Wt.array() *= xht.array() / (dt.array() + eps);
      }
      acc.wtw.noalias() += Wt.transpose() * Wt;
      for (Eigen::Index c = 0; c < d; c += kChunk) {
        const Eigen::Index len = std::min(kChunk, d - c);
        const auto Xc = Xt.middleCols(c, len);
        auto rc = r.topLeftCorner(rows, len);
        rc.noalias() = Xc - Wt * H.middleCols(c, len);
        acc.objective += rc.squaredNorm();
        acc.wtx.middleCols(c, len).noalias() += Wt.transpose() * Xc;
      }
    }
  }

  const RowMatrix& X_;
  std::vector<SlabRange> slabs_;
  std::vector<PassSums> partial_;
};

void check_init(const RowMatrix& X, const NmfInit& init) {
  if (init.W.rows() != X.rows() || init.H.cols() != X.cols() || init.W.cols() != init.H.rows() ||
      init.W.cols() < 1) {
    throw GeometryError("NMF initial factors do not match the data shape");
  }
}

bool converged_step(double prev, double cur, double tol) {
  if (prev <= 0.0) return true;
  return (prev - cur) / prev < tol;
}

}  // namespace

NmfInit nndsvd_init(const RowMatrix& X, int k, linalg::SvdMethod method) {
  check_input(X, k);
  if (method == linalg::SvdMethod::Automatic) {
    const double lo = static_cast<double>(std::min(X.rows(), X.cols()));
    const double hi = static_cast<double>(std::max(X.rows(), X.cols()));
    method = lo * lo * hi <= 1e9 ? linalg::SvdMethod::Exact : linalg::SvdMethod::Krylov;
  }
  const linalg::Svd svd = linalg::svd(X, std::nullopt, k, method);

  NmfInit init;
  init.W = RowMatrix::Zero(X.rows(), k);
  init.H = RowMatrix::Zero(k, X.cols());
  for (int j = 0; j < k && j < svd.s.size(); ++j) {
    const Vector x = svd.u.col(j), y = svd.v.col(j);
    const Vector xp = x.cwiseMax(0.0), xn = (-x).cwiseMax(0.0);
    const Vector yp = y.cwiseMax(0.0), yn = (-y).cwiseMax(0.0);
    const double xpn = xp.norm(), ypn = yp.norm(), xnn = xn.norm(), ynn = yn.norm();
    const double mp = xpn * ypn, mn = xnn * ynn;
    if (std::max(mp, mn) <= 0.0 || svd.s(j) <= 0.0) continue;
    const bool positive = mp >= mn;
    const double sigma = positive ? mp : mn;
    const double scale = std::sqrt(svd.s(j) * sigma);
    init.W.col(j) = scale * (positive ? Vector(xp / xpn) : Vector(xn / xnn));
    init.H.row(j) = scale * (positive ? Vector(yp / ypn) : Vector(yn / ynn)).transpose();
  }

  const double mean = X.mean();
  if (!(mean > 0.0)) throw DegenerateError("NMF input is all zero");
  init.W = (init.W.array() == 0.0).select(mean, init.W);
  init.H = (init.H.array() == 0.0).select(mean, init.H);
  return init;
}

Decomposition nmf_iterate(const RowMatrix& X, NmfInit init, const NmfOptions& opts) {
  check_init(X, init);
  if (opts.max_iter < 0) throw ParameterError("max_iter must be >= 0");
  Decomposition dec;
  dec.k = static_cast<int>(init.W.cols());
  dec.W = std::move(init.W);
  dec.H = std::move(init.H);

  FusedPass pass(X, dec.k);
  Matrix hht = dec.H * dec.H.transpose();
  PassSums sums = pass.run(dec.W, dec.H, hht, opts.eps, /*update=*/false);
  dec.objective_trace.push_back(sums.objective);

  for (int it = 1; it <= opts.max_iter; ++it) {
    const RowMatrix denom = sums.wtw * dec.H;
    dec.H.array() *= sums.wtx.array() / (denom.array() + opts.eps);
    hht.noalias() = dec.H * dec.H.transpose();
    sums = pass.run(dec.W, dec.H, hht, opts.eps, /*update=*/true);
    const double obj = sums.objective;
    if (!std::isfinite(obj)) {
      throw NumericalError("NMF produced non-finite values at iteration " + std::to_string(it), it);
    }
    assert((dec.W.array() >= 0.0).all() && (dec.H.array() >= 0.0).all());
    const double prev = dec.objective_trace.back();
    dec.objective_trace.push_back(obj);
    dec.iterations_run = it;
    if (converged_step(prev, obj, opts.tol)) {
      dec.converged = true;
      break;
    }
  }
  return dec;
}

Decomposition nmf_iterate_reference(const RowMatrix& X, NmfInit init, const NmfOptions& opts) {
  check_init(X, init);
  Decomposition dec;
  dec.k = static_cast<int>(init.W.cols());
  dec.W = std::move(init.W);
  dec.H = std::move(init.H);
  dec.objective_trace.push_back(reference_objective(X, dec.W, dec.H));
  for (int it = 1; it <= opts.max_iter; ++it) {
    const RowMatrix wtx = dec.W.transpose() * X;
    const RowMatrix wtwh = (dec.W.transpose() * dec.W) * dec.H;
    dec.H.array() *= wtx.array() / (wtwh.array() + opts.eps);

    const RowMatrix xht = X * dec.H.transpose();
    const RowMatrix whht = dec.W * (dec.H * dec.H.transpose());
    dec.W.array() *= xht.array() / (whht.array() + opts.eps);

    const double obj = reference_objective(X, dec.W, dec.H);
    if (!std::isfinite(obj)) {
      throw NumericalError("NMF produced non-finite values at iteration " + std::to_string(it), it);
    }
    const double prev = dec.objective_trace.back();
    dec.objective_trace.push_back(obj);
    dec.iterations_run = it;
    if (converged_step(prev, obj, opts.tol)) {
      dec.converged = true;
      break;
    }
  }
  return dec;
}

Decomposition nmf_fit(const RowMatrix& X, int k, const NmfOptions& opts) {
  return nmf_iterate(X, nndsvd_init(X, k, opts.init_method), opts);
}

Decomposition nmf_fit_reference(const RowMatrix& X, int k, const NmfOptions& opts) {
  return nmf_iterate_reference(X, nndsvd_init(X, k, opts.init_method), opts);
}

std::vector<double> component_energy(const Decomposition& dec) {
  std::vector<double> e(dec.k);
  for (int j = 0; j < dec.k; ++j) e[j] = dec.W.col(j).squaredNorm() * dec.H.row(j).squaredNorm();
  return e;
}

Decomposition order_components(Decomposition dec) {
  const auto energy = component_energy(dec);
  std::vector<int> order(dec.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return energy[a] > energy[b]; });
  RowMatrix W(dec.W.rows(), dec.k), H(dec.k, dec.H.cols());
  for (int j = 0; j < dec.k; ++j) {
    W.col(j) = dec.W.col(order[j]);
    H.row(j) = dec.H.row(order[j]);
  }
  dec.W = std::move(W);
  dec.H = std::move(H);
  return dec;
}

ComponentImages reshape_outputs(const Decomposition& dec, const WindowGrid& grid) {
  const Eigen::Index side = grid.elemsize;
  if (dec.W.rows() != grid.n_windows() || dec.H.cols() != side * side || dec.W.cols() != dec.k ||
      dec.H.rows() != dec.k) {
    throw GeometryError("decomposition shape does not match the window grid");
  }
  ComponentImages out;
  for (int j = 0; j < dec.k; ++j) {
    RowMatrix map(grid.ny(), grid.nx());
    for (int gy = 0; gy < grid.ny(); ++gy) {
      for (int gx = 0; gx < grid.nx(); ++gx) map(gy, gx) = dec.W(grid.row_of(gx, gy), j);
    }
    out.maps.push_back(std::move(map));
    out.factors.push_back(Eigen::Map<const RowMatrix>(dec.H.row(j).data(), side, side));
  }
  return out;
}

}  // namespace locfft
