#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locfft/image.hpp"
#include "locfft/matrix.hpp"
#include "locfft/pca.hpp"

namespace locfft {

inline constexpr double kDefaultDcExclusion = 3.0;
inline constexpr double kDefaultIsotropyThreshold = 2.0;

struct PeakOptions {
  double dc_exclusion_radius = kDefaultDcExclusion;  // bins around DC ignored by the search
  double isotropy_threshold = kDefaultIsotropyThreshold;  // ring max/mean below this => isotropic
};

/// Dominant off-centre maximum of a centre-shifted factor spectrum.
struct PeakInfo {
  int offset_x = 0;  // bins right of centre
  int offset_y = 0;  // bins below centre
  double radius_bins = 0.0;
  double angle_deg = 0.0;  // [0, 180), clockwise from horizontal (image y points down)
  double spacing_window_px = 0.0;  // elemsize / radius_bins
  std::optional<double> spacing_nm;
  double peak_value = 0.0;
  double isotropy_ratio = 0.0;  // max / mean of the spectrum on the peak's ring
  bool isotropic = false;
};

/// Searches bins farther than dc_exclusion_radius from the centre; first
/// maximum in row-major order wins. Throws DegenerateError when nothing
/// positive remains outside the exclusion disc.
PeakInfo find_peak(const RowMatrix& factor, const PeakOptions& opts = {},
                   std::optional<double> pixel_size_nm = std::nullopt);

/// Real-space spacing in nm: spacing_window_px * pixel_size_nm.
double physical_spacing(double spacing_window_px, double pixel_size_nm);
std::optional<double> physical_spacing(double spacing_window_px, std::optional<double> pixel_size_nm);

struct SweepRow {
  int elemsize = 0;
  bool ok = false;
  int n_windows = 0;
  int auto_k = 1;
  std::vector<int> candidates;
  std::string error;  // set when !ok
};

/// Scree analysis at each window size, in input order. A size that does not fit
/// the image yields a failed row; the sweep continues.
std::vector<SweepRow> sweep_elemsize(const GrayImage& img, std::span<const int> sizes, int xstep,
                                     int ystep, const PcaOptions& pca = {});

}  // namespace locfft
