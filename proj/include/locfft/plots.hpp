#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locfft/characterize.hpp"
#include "locfft/matrix.hpp"

namespace locfft {

struct PixelPoint {
  int x = 0;
  int y = 0;
};

/// Where render_scree_plot put things, for tests.
struct ScreePlotLayout {
  int width = 0;
  int height = 0;
  std::vector<PixelPoint> points;  // one per ratio, in component order
  std::vector<int> marked;         // candidate components drawn with a ring
  bool warning = false;            // no candidates: annotation drawn instead of rings
};

/// Log-scale scatter of the variance ratios. Candidates get a ring and a label;
/// auto_k is named in the title line.
ScreePlotLayout render_scree_plot(std::span<const double> variance_ratio, std::span<const int> candidates,
                                  int auto_k, const std::filesystem::path& path);

/// Loading map (linear gray) beside the factor spectrum (log1p gray), with the
/// caption underneath. A constant image renders as uniform mid-gray.
void render_component_panel(const RowMatrix& map, const RowMatrix& factor, int index,
                            const std::string& caption, const std::optional<PeakInfo>& peak,
                            const std::filesystem::path& path);

/// Writes component_01.png, component_02.png, ... under `dir`, one per component.
std::vector<std::filesystem::path> render_component_panels(const std::vector<RowMatrix>& maps,
                                                           const std::vector<RowMatrix>& factors,
                                                           const std::vector<std::string>& captions,
                                                           const std::vector<std::optional<PeakInfo>>& peaks,
                                                           const std::filesystem::path& dir);

/// auto_k against window size for a sweep; failed rows are skipped.
void render_sweep_plot(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// 8-bit image scaled to [0, 255] from the data range; constant data maps to 128.
/// With log1p_scale the values are first mapped to log1p(1e4 * v / max v).
std::vector<unsigned char> to_gray8(const RowMatrix& m, bool log1p_scale);

std::string component_file_name(int index);

}  // namespace locfft
