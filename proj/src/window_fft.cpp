#include "locfft/window_fft.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "locfft/errors.hpp"

namespace locfft {
namespace {

// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<int> axis_origins(int extent, int elemsize, int step) {
  std::vector<int> origins;
  const int last = extent - elemsize;
  for (int o = 0; o <= last; o += step) origins.push_back(o);
  if (origins.back() != last) origins.push_back(last);
  return origins;
}

void check_grid(const GrayImage& img, const WindowGrid& grid) {
  if (grid.xs.empty() || grid.ys.empty()) throw GeometryError("window grid is empty");
  if (grid.xs.front() < 0 || grid.xs.back() + grid.elemsize > img.width) {
    throw GeometryError("window grid exceeds image width " + std::to_string(img.width));
  }
  if (grid.ys.front() < 0 || grid.ys.back() + grid.elemsize > img.height) {
    throw GeometryError("window grid exceeds image height " + std::to_string(img.height));
  }
}

SpectrumStack allocate_stack(const GrayImage& img, const WindowGrid& grid) {
  validate(img);
  check_grid(img, grid);
  SpectrumStack stack;
  stack.grid = grid;
  const Eigen::Index d = static_cast<Eigen::Index>(grid.elemsize) * grid.elemsize;
  stack.X.resize(grid.n_windows(), d);
  return stack;
}

}  // namespace

WindowGrid plan_grid(int width, int height, int elemsize, int xstep, int ystep) {
  if (elemsize < 8) throw ParameterError("elemsize must be >= 8, got " + std::to_string(elemsize));
  if (xstep < 1 || ystep < 1) throw ParameterError("xstep and ystep must be >= 1");
  if (elemsize > width) {
    throw GeometryError("elemsize " + std::to_string(elemsize) + " exceeds image width " +
                        std::to_string(width));
  }
  if (elemsize > height) {
    throw GeometryError("elemsize " + std::to_string(elemsize) + " exceeds image height " +
                        std::to_string(height));
  }
  WindowGrid grid;
  grid.elemsize = elemsize;
  grid.xstep = xstep;
  grid.ystep = ystep;
  grid.xs = axis_origins(width, elemsize, xstep);
  grid.ys = axis_origins(height, elemsize, ystep);
  return grid;
}

RowMatrix hann2d(int n) {
  if (n < 2) throw ParameterError("Hann window size must be >= 2, got " + std::to_string(n));
  std::vector<double> w(n);
  for (int i = 0; i <= (n - 1) / 2; ++i) {
    const double v = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    w[i] = v;
    w[n - 1 - i] = v;
  }
  w.front() = 0.0;
  w.back() = 0.0;
  RowMatrix out(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out(r, c) = w[r] * w[c];
  }
  return out;
}

// ---------------------------------------------------------------------------

SpectrumEngine::Workspace::Workspace(int side) {
  const std::size_t n = static_cast<std::size_t>(side);
  in_ = fftw_alloc_real(n * n);
  out_ = fftw_alloc_complex(n * (n / 2 + 1));
  if (!in_ || !out_) {
    fftw_free(in_);
    fftw_free(out_);
    throw std::bad_alloc();
  }
}

SpectrumEngine::Workspace::~Workspace() {
  fftw_free(in_);
  fftw_free(out_);
}

SpectrumEngine::SpectrumEngine(int side) : side_(side), window_(hann2d(side)) {
  Workspace probe(side);
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_dft_r2c_2d(side, side, probe.in_, static_cast<fftw_complex*>(probe.out_),
                               FFTW_ESTIMATE);
  if (!plan_) throw Error("FFTW could not create a plan for side " + std::to_string(side));
}

SpectrumEngine::~SpectrumEngine() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void SpectrumEngine::compute(const GrayImage& img, int x0, int y0, Workspace& ws,
                             std::span<double> out) const {
  const int n = side_;
  for (int r = 0; r < n; ++r) {
    const double* src = img.data.data() + static_cast<std::size_t>(y0 + r) * img.width + x0;
    const double* win = window_.data() + static_cast<std::size_t>(r) * n;
    double* dst = ws.in_ + static_cast<std::size_t>(r) * n;
    for (int c = 0; c < n; ++c) dst[c] = src[c] * win[c];
  }
  transform(ws, out);
}

void SpectrumEngine::compute(std::span<const double> roi, Workspace& ws, std::span<double> out) const {
  const std::size_t n2 = static_cast<std::size_t>(side_) * side_;
  const double* win = window_.data();
  for (std::size_t i = 0; i < n2; ++i) ws.in_[i] = roi[i] * win[i];
  transform(ws, out);
}

void SpectrumEngine::compute_tapered(std::span<const double> tapered, Workspace& ws,
                                     std::span<double> out) const {
  std::copy(tapered.begin(), tapered.end(), ws.in_);
  transform(ws, out);
}

void SpectrumEngine::transform(Workspace& ws, std::span<double> out) const {
  const int n = side_;
  const int half = n / 2;
  const int hc = half + 1;  // columns of the r2c output
  auto* spec = static_cast<fftw_complex*>(ws.out_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), ws.in_, spec);

  // Expand the half spectrum by Hermitian symmetry and centre-shift in one pass.
  for (int ky = 0; ky < n; ++ky) {
    const int sy = (ky + half) % n;
    double* dst = out.data() + static_cast<std::size_t>(sy) * n;
    const fftw_complex* row = spec + static_cast<std::size_t>(ky) * hc;
    const fftw_complex* mirror = spec + static_cast<std::size_t>((n - ky) % n) * hc;
    for (int kx = 0; kx < n; ++kx) {
      const double* z = kx < hc ? row[kx] : mirror[n - kx];
      dst[(kx + half) % n] = z[0] * z[0] + z[1] * z[1];
    }
  }
}

// ---------------------------------------------------------------------------

Spectrum power_spectrum(std::span<const double> roi, const RowMatrix& window) {
  const int n = static_cast<int>(window.rows());
  if (window.cols() != n || roi.size() != static_cast<std::size_t>(n) * n) {
    throw GeometryError("power_spectrum: roi and window sizes differ");
  }
  std::vector<double> windowed(roi.size());
  for (std::size_t i = 0; i < roi.size(); ++i) windowed[i] = roi[i] * window.data()[i];

  const SpectrumEngine engine(n);
  SpectrumEngine::Workspace ws(n);
  Spectrum s;
  s.side = n;
  s.values.resize(roi.size());
  engine.compute_tapered(windowed, ws, s.values);
  return s;
}

SpectrumStack build_dataset(const GrayImage& img, const WindowGrid& grid) {
  SpectrumStack stack = allocate_stack(img, grid);
  const SpectrumEngine engine(grid.elemsize);
  const int nx = grid.nx();
  const int n_windows = grid.n_windows();
  const std::size_t d = static_cast<std::size_t>(stack.X.cols());
#pragma omp parallel
  {
    SpectrumEngine::Workspace ws(grid.elemsize);
#pragma omp for schedule(static)
    for (int w = 0; w < n_windows; ++w) {
      const int gx = w % nx, gy = w / nx;
      engine.compute(img, grid.xs[gx], grid.ys[gy], ws, std::span(stack.X.row(w).data(), d));
    }
  }
  return stack;
}

SpectrumStack build_dataset_serial(const GrayImage& img, const WindowGrid& grid) {
  SpectrumStack stack = allocate_stack(img, grid);
  const SpectrumEngine engine(grid.elemsize);
  SpectrumEngine::Workspace ws(grid.elemsize);
  const std::size_t d = static_cast<std::size_t>(stack.X.cols());
  for (int gy = 0; gy < grid.ny(); ++gy) {
    for (int gx = 0; gx < grid.nx(); ++gx) {
      const int w = grid.row_of(gx, gy);
      engine.compute(img, grid.xs[gx], grid.ys[gy], ws, std::span(stack.X.row(w).data(), d));
    }
  }
  return stack;
}

}  // namespace locfft
