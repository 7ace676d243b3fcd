#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace locfft {

/// Single-channel image with real intensities, stored row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  std::optional<double> pixel_size_nm;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  std::span<const double> row(int y) const {
    return {data.data() + static_cast<std::size_t>(y) * width, static_cast<std::size_t>(width)};
  }

  std::size_t size() const { return data.size(); }
};

/// Throws GeometryError / ParameterError if the invariants of GrayImage are broken
/// (size mismatch, non-positive dimensions, non-finite samples, bad pixel size).
void validate(const GrayImage& img);

}  // namespace locfft
