#include "locfft/characterize.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "locfft/errors.hpp"
#include "locfft/window_fft.hpp"

namespace locfft {

PeakInfo find_peak(const RowMatrix& factor, const PeakOptions& opts, std::optional<double> pixel_size_nm) {
  const int side = static_cast<int>(factor.rows());
  if (factor.cols() != side || side < 2) throw GeometryError("factor spectrum must be square");
  if (!(opts.dc_exclusion_radius >= 1.0)) throw ParameterError("dc_exclusion_radius must be >= 1");
  if (factor.minCoeff() < 0.0) throw ParameterError("factor spectrum must be non-negative");

  const int c = side / 2;
  const double excl2 = opts.dc_exclusion_radius * opts.dc_exclusion_radius;
  double best = 0.0;
  int best_r = -1, best_c = -1;
  for (int r = 0; r < side; ++r) {
    for (int col = 0; col < side; ++col) {
      const double dy = r - c, dx = col - c;
      if (dx * dx + dy * dy <= excl2) continue;
      if (factor(r, col) > best) {
        best = factor(r, col);
        best_r = r;
        best_c = col;
      }
    }
  }
  if (best_r < 0) throw DegenerateError("factor spectrum has no energy outside the DC exclusion disc");

  PeakInfo p;
  p.offset_x = best_c - c;
  p.offset_y = best_r - c;
  p.radius_bins = std::hypot(static_cast<double>(p.offset_x), static_cast<double>(p.offset_y));
  double angle = std::atan2(static_cast<double>(p.offset_y), static_cast<double>(p.offset_x)) * 180.0 /
                 std::numbers::pi;
  angle = std::fmod(angle, 180.0);
  if (angle < 0.0) angle += 180.0;
  if (angle >= 180.0) angle = 0.0;
  p.angle_deg = angle;
  p.spacing_window_px = side / p.radius_bins;
  p.spacing_nm = physical_spacing(p.spacing_window_px, pixel_size_nm);
  p.peak_value = best;

  // Angular contrast on the ring through the peak.
  double ring_max = 0.0, ring_sum = 0.0;
  int ring_count = 0;
  for (int r = 0; r < side; ++r) {
    for (int col = 0; col < side; ++col) {
      const double dist = std::hypot(static_cast<double>(r - c), static_cast<double>(col - c));
      if (std::abs(dist - p.radius_bins) > 0.5) continue;
      ring_max = std::max(ring_max, factor(r, col));
      ring_sum += factor(r, col);
      ++ring_count;
    }
  }
  const double ring_mean = ring_count ? ring_sum / ring_count : 0.0;
  p.isotropy_ratio = ring_mean > 0.0 ? ring_max / ring_mean : std::numeric_limits<double>::infinity();
  p.isotropic = p.isotropy_ratio < opts.isotropy_threshold;
  return p;
}

double physical_spacing(double spacing_window_px, double pixel_size_nm) {
  if (!(spacing_window_px > 0.0) || !(pixel_size_nm > 0.0)) {
    throw ParameterError("physical_spacing needs positive spacing and pixel size");
  }
  return spacing_window_px * pixel_size_nm;
}

std::optional<double> physical_spacing(double spacing_window_px, std::optional<double> pixel_size_nm) {
  if (!pixel_size_nm) return std::nullopt;
  return physical_spacing(spacing_window_px, *pixel_size_nm);
}

std::vector<SweepRow> sweep_elemsize(const GrayImage& img, std::span<const int> sizes, int xstep,
                                     int ystep, const PcaOptions& pca) {
  if (std::set<int>(sizes.begin(), sizes.end()).size() != sizes.size()) {
    throw ParameterError("sweep sizes must be distinct");
  }
  std::vector<SweepRow> rows;
  for (int size : sizes) {
    SweepRow row;
    row.elemsize = size;
    try {
      const WindowGrid grid = plan_grid(img.width, img.height, size, xstep, ystep);
      row.n_windows = grid.n_windows();
      const SpectrumStack stack = build_dataset(img, grid);
      const ScreeData scree = fit_pca(stack, pca);
      row.candidates = scree.candidates;
      row.auto_k = scree.auto_k;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace locfft
