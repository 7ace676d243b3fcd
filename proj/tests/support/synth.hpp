#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locfft/image.hpp"

namespace synth {

/// Left half vertical stripes, right half horizontal stripes, both
/// amplitude * sin(2 pi t / period), plus N(0, sigma) noise.
locfft::GrayImage two_texture(int size, double period, double amplitude, double sigma, std::uint64_t seed,
                              double offset = 0.0);

/// two_texture with its bottom third replaced by diagonal stripes of
/// `third_period` pixels.
locfft::GrayImage three_texture(int size, double period, double third_period, double amplitude, double sigma,
                                std::uint64_t seed);

/// True when x0 .. x0 + elemsize - 1 lies entirely on one side of the texture boundary.
bool window_in_left(int x0, int elemsize, int size);
bool window_in_right(int x0, int elemsize, int size);

/// 8/16-bit baseline TIFF written byte by byte, independent of the library encoder.
std::vector<unsigned char> tiff_bytes(int width, int height, int bits, const std::vector<unsigned>& samples,
                                      bool big_endian, bool float32 = false,
                                      const std::vector<float>& float_samples = {});

}  // namespace synth
