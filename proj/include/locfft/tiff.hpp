#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace locfft::tiff {

/// One decoded TIFF page, samples promoted to double.
struct Page {
  int width = 0;
  int height = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::vector<double> samples;  // row-major, width * height
  std::optional<double> pixel_size_nm;
};

/// Decodes every page of a baseline uncompressed single-channel TIFF.
/// Accepts II and MM byte order; 8/16-bit unsigned and 32-bit IEEE float.
std::vector<Page> decode(std::span<const unsigned char> bytes);

/// A page to be written as 32-bit float. `samples` is row-major.
struct FloatPage {
  int width = 0;
  int height = 0;
  std::span<const float> samples;
};

/// Multi-page 32-bit float, little-endian, uncompressed, BlackIsZero TIFF.
/// `description` is stored in the ImageDescription tag of the first page.
std::vector<unsigned char> encode_float_stack(std::span<const FloatPage> pages,
                                              const std::string& description = {});

}  // namespace locfft::tiff
