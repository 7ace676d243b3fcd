#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "locfft/image.hpp"

namespace locfft {

/// Rec. 709 luma weights. They sum to exactly 1.0 in binary floating point.
inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

/// Rec. 709 luma. Written relative to the green channel so that gray input
/// (v, v, v) maps to exactly v.
constexpr double to_grayscale(double r, double g, double b) {
  return g + kLumaR * (r - g) + kLumaB * (b - g);
}

/// Loads TIFF (8/16-bit unsigned, 32-bit float; either byte order), PNG, JPEG
/// or BMP. Format is detected from the file signature, not the extension.
/// Integer samples are promoted to double without rescaling.
GrayImage load_image(const std::filesystem::path& path);

/// Bilinear resample to `target_width`, preserving aspect ratio. Pixel centres
/// are aligned, so target_width == width reproduces the input exactly.
GrayImage rescale_width(const GrayImage& img, int target_width);

// Format-specific entry points, used by load_image and directly by tests.
GrayImage decode_tiff(std::span<const unsigned char> bytes);
GrayImage decode_bmp(std::span<const unsigned char> bytes);
GrayImage decode_png(std::span<const unsigned char> bytes);
GrayImage decode_jpeg(std::span<const unsigned char> bytes);

/// Single-page 32-bit float little-endian TIFF of `img`.
void save_float_tiff(const GrayImage& img, const std::filesystem::path& path);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace locfft
