#pragma once

#include <memory>
#include <span>
#include <vector>

#include "locfft/image.hpp"
#include "locfft/matrix.hpp"

namespace locfft {

/// Origins of the square analysis windows laid over an image.
struct WindowGrid {
  int elemsize = 0;
  int xstep = 0;
  int ystep = 0;
  std::vector<int> xs;  // ascending window x-origins
  std::vector<int> ys;  // ascending window y-origins

  int nx() const { return static_cast<int>(xs.size()); }
  int ny() const { return static_cast<int>(ys.size()); }
  int n_windows() const { return nx() * ny(); }
  /// Row of the window at grid position (gx, gy) in the spectrum stack.
  int row_of(int gx, int gy) const { return gy * nx() + gx; }
};

/// Centre-shifted power spectrum of one window; DC sits at (side/2, side/2).
struct Spectrum {
  int side = 0;
  std::vector<double> values;  // row-major side x side

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * side + col]; }
};

/// All window spectra, one flattened spectrum per row (row = gy * nx + gx).
struct SpectrumStack {
  WindowGrid grid;
  RowMatrix X;  // n_windows x elemsize^2, non-negative

  int n_windows() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
};

/// Window origins every `step` pixels from 0, plus a final origin flush with the
/// far edge when the steps do not land on it, so every pixel is covered.
WindowGrid plan_grid(int width, int height, int elemsize, int xstep, int ystep);

/// Symmetric 2D Hann taper (outer product of the 1D window, endpoints zero).
RowMatrix hann2d(int n);

/// |DFT2(roi * window)|^2, unnormalized forward transform, centre-shifted.
/// `roi` and `window` are row-major n x n.
Spectrum power_spectrum(std::span<const double> roi, const RowMatrix& window);

/// Computes every window spectrum of `img`, parallel over windows (OpenMP).
/// Output is independent of the thread count.
SpectrumStack build_dataset(const GrayImage& img, const WindowGrid& grid);

/// Single-threaded reference for build_dataset; bit-identical output.
SpectrumStack build_dataset_serial(const GrayImage& img, const WindowGrid& grid);

/// Reusable FFT plan for one window size. The plan is shared read-only; each
/// worker needs its own Workspace.
class SpectrumEngine {
 public:
  explicit SpectrumEngine(int side);
  ~SpectrumEngine();
  SpectrumEngine(const SpectrumEngine&) = delete;
  SpectrumEngine& operator=(const SpectrumEngine&) = delete;

  class Workspace {
   public:
    explicit Workspace(int side);
    ~Workspace();
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

   private:
    friend class SpectrumEngine;
    double* in_ = nullptr;
    void* out_ = nullptr;  // fftw_complex[side * (side/2 + 1)]
  };

  int side() const { return side_; }
  const RowMatrix& window() const { return window_; }

  /// Power spectrum of the side x side block of `img` whose top-left corner is
  /// (x0, y0), written to `out` (side^2 values, centre-shifted).
  void compute(const GrayImage& img, int x0, int y0, Workspace& ws, std::span<double> out) const;

  /// Same, for an explicit row-major block instead of an image region.
  void compute(std::span<const double> roi, Workspace& ws, std::span<double> out) const;

  /// Transform of data the caller has already multiplied by a taper.
  void compute_tapered(std::span<const double> tapered, Workspace& ws, std::span<double> out) const;

 private:
  void transform(Workspace& ws, std::span<double> out) const;

  int side_;
  RowMatrix window_;
  void* plan_ = nullptr;  // fftw_plan
};

}  // namespace locfft
