#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace oracle {

std::vector<double> hann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

RowMatrix power_spectrum(const RowMatrix& roi) {
  const int n = static_cast<int>(roi.rows());
  const auto w = hann(n);
  RowMatrix tapered(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) tapered(y, x) = roi(y, x) * w[y] * w[x];
  }
  // Twiddles reduced mod n so the angle stays small and exact for integer products.
  std::vector<std::complex<double>> tw(n);
  for (int i = 0; i < n; ++i) tw[i] = std::polar(1.0, -2.0 * std::numbers::pi * i / n);

  RowMatrix out(n, n);
  for (int ky = 0; ky < n; ++ky) {
    for (int kx = 0; kx < n; ++kx) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) acc += tapered(y, x) * tw[(ky * y + kx * x) % n];
      }
      out((ky + n / 2) % n, (kx + n / 2) % n) = std::norm(acc);
    }
  }
  return out;
}

RowMatrix dataset(const GrayImage& img, int elemsize, const std::vector<int>& xs, const std::vector<int>& ys) {
  const int d = elemsize * elemsize;
  RowMatrix X(static_cast<Eigen::Index>(xs.size() * ys.size()), d);
  int row = 0;
  for (int y0 : ys) {
    for (int x0 : xs) {
      RowMatrix roi(elemsize, elemsize);
      for (int y = 0; y < elemsize; ++y) {
        for (int x = 0; x < elemsize; ++x) roi(y, x) = img.at(x0 + x, y0 + y);
      }
      const RowMatrix s = power_spectrum(roi);
      X.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(s.data(), d);
    }
  }
  return X;
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> covariance_eigen(const RowMatrix& X) {
  const Matrix Xc = X.rowwise() - X.colwise().mean();
  const Matrix C = Xc.transpose() * Xc / static_cast<double>(X.rows() - 1);
  return Eigen::SelfAdjointEigenSolver<Matrix>(C);
}

}  // namespace

std::vector<double> covariance_ratios(const RowMatrix& X, double rel_cut) {
  const auto es = covariance_eigen(X);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.rbegin(), ev.rend());
  double total = 0.0;
  for (double e : ev) total += std::max(e, 0.0);
  std::vector<double> out;
  for (double e : ev) {
    if (e > rel_cut * ev.front()) out.push_back(e / total);
  }
  return out;
}

Matrix covariance_axes(const RowMatrix& X, int count) {
  const auto es = covariance_eigen(X);
  const Eigen::Index d = es.eigenvalues().size();
  Matrix axes(d, count);
  for (int j = 0; j < count; ++j) axes.col(j) = es.eigenvectors().col(d - 1 - j);
  return axes;
}

double best_rank_k_error(const RowMatrix& X, int k) {
  Eigen::JacobiSVD<Matrix> svd(Matrix(X), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  double tail = 0.0;
  for (Eigen::Index i = k; i < s.size(); ++i) tail += s(i) * s(i);
  return std::sqrt(tail);
}

std::vector<int> scree_candidates(const std::vector<double>& ratios) {
  const int m = static_cast<int>(ratios.size());
  std::vector<int> out;
  if (m < 3) return out;
  // 1-based: L[1..m], g[1..m-1].
  std::vector<double> L(m + 1), g(m);
  for (int j = 1; j <= m; ++j) L[j] = std::log10(ratios[j - 1]);
  for (int j = 1; j <= m - 1; ++j) g[j] = L[j + 1] - L[j];
  for (int j = 2; j + 1 <= m - 1; ++j) {
    if (g[j] > g[j - 1] && g[j] >= g[j + 1]) out.push_back(j);
  }
  return out;
}

Factorization nmf(const RowMatrix& X, int k, int iterations, double eps) {
  const Eigen::Index n = X.rows(), d = X.cols();
  Eigen::JacobiSVD<Matrix> svd(Matrix(X), Eigen::ComputeThinU | Eigen::ComputeThinV);
  Factorization f;
  f.W = RowMatrix::Zero(n, k);
  f.H = RowMatrix::Zero(k, d);
  for (int j = 0; j < k; ++j) {
    const Vector u = svd.matrixU().col(j), v = svd.matrixV().col(j);
    const double s = svd.singularValues()(j);
    const Vector up = u.cwiseMax(0.0), un = (-u).cwiseMax(0.0);
    const Vector vp = v.cwiseMax(0.0), vn = (-v).cwiseMax(0.0);
    const double pos = up.norm() * vp.norm(), neg = un.norm() * vn.norm();
    if (std::max(pos, neg) <= 0.0 || s <= 0.0) continue;
    const bool use_pos = pos >= neg;
    const Vector a = use_pos ? up : un, b = use_pos ? vp : vn;
    const double scale = std::sqrt(s * (use_pos ? pos : neg));
    f.W.col(j) = scale * a / a.norm();
    f.H.row(j) = (scale * b / b.norm()).transpose();
  }
  const double mean = X.mean();
  for (Eigen::Index i = 0; i < f.W.size(); ++i) {
    if (f.W.data()[i] == 0.0) f.W.data()[i] = mean;
  }
  for (Eigen::Index i = 0; i < f.H.size(); ++i) {
    if (f.H.data()[i] == 0.0) f.H.data()[i] = mean;
  }

  auto objective = [&] {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < d; ++c) {
        double wh = 0.0;
        for (int j = 0; j < k; ++j) wh += f.W(i, j) * f.H(j, c);
        acc += (X(i, c) - wh) * (X(i, c) - wh);
      }
    }
    return 0.5 * acc;
  };
  f.objective.push_back(objective());
  for (int it = 0; it < iterations; ++it) {
    // H <- H * (W^T X) / (W^T W H + eps), element by element.
    RowMatrix Hn(k, d);
    for (int a = 0; a < k; ++a) {
      for (Eigen::Index c = 0; c < d; ++c) {
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) num += f.W(i, a) * X(i, c);
        for (int b = 0; b < k; ++b) {
          double wtw = 0.0;
          for (Eigen::Index i = 0; i < n; ++i) wtw += f.W(i, a) * f.W(i, b);
          den += wtw * f.H(b, c);
        }
        Hn(a, c) = f.H(a, c) * num / (den + eps);
      }
    }
    f.H = Hn;
    // W <- W * (X H^T) / (W H H^T + eps)
    RowMatrix Wn(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int a = 0; a < k; ++a) {
        double num = 0.0, den = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) num += X(i, c) * f.H(a, c);
        for (int b = 0; b < k; ++b) {
          double hht = 0.0;
          for (Eigen::Index c = 0; c < d; ++c) hht += f.H(b, c) * f.H(a, c);
          den += f.W(i, b) * hht;
        }
        Wn(i, a) = f.W(i, a) * num / (den + eps);
      }
    }
    f.W = Wn;
    f.objective.push_back(objective());
  }
  return f;
}

}  // namespace oracle
