#include "locfft/image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include <jpeglib.h>
#include <png.h>

#include "locfft/errors.hpp"
#include "locfft/tiff.hpp"

namespace locfft {

void validate(const GrayImage& img) {
  if (img.width < 1 || img.height < 1) {
    throw GeometryError("image dimensions must be positive, got " + std::to_string(img.width) + "x" +
                        std::to_string(img.height));
  }
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw GeometryError("image data length " + std::to_string(img.data.size()) +
                        " does not match " + std::to_string(img.width) + "x" +
                        std::to_string(img.height));
  }
  for (double v : img.data) {
    if (!std::isfinite(v)) throw ParameterError("image contains non-finite intensities");
  }
  if (img.pixel_size_nm && !(*img.pixel_size_nm > 0.0 && std::isfinite(*img.pixel_size_nm))) {
    throw ParameterError("pixel_size_nm must be positive and finite");
  }
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

GrayImage decode_tiff(std::span<const unsigned char> bytes) {
  auto pages = tiff::decode(bytes);
  auto& first = pages.front();
  GrayImage img;
  img.width = first.width;
  img.height = first.height;
  img.data = std::move(first.samples);
  img.pixel_size_nm = first.pixel_size_nm;
  return img;
}

// ---------------------------------------------------------------------------
// BMP

namespace {

std::uint32_t le32(std::span<const unsigned char> b, std::size_t off) {
  if (off + 4 > b.size()) throw FormatError("BMP: truncated header");
  return std::uint32_t{b[off]} | std::uint32_t{b[off + 1]} << 8 | std::uint32_t{b[off + 2]} << 16 |
         std::uint32_t{b[off + 3]} << 24;
}

std::uint16_t le16(std::span<const unsigned char> b, std::size_t off) {
  if (off + 2 > b.size()) throw FormatError("BMP: truncated header");
  return static_cast<std::uint16_t>(b[off] | b[off + 1] << 8);
}

}  // namespace

GrayImage decode_bmp(std::span<const unsigned char> bytes) {
  if (bytes.size() < 26 || bytes[0] != 'B' || bytes[1] != 'M') throw FormatError("BMP: bad signature");
  const std::uint32_t pixel_offset = le32(bytes, 10);
  const std::uint32_t dib_size = le32(bytes, 14);

  std::int64_t width, height;
  int bpp;
  std::uint32_t compression = 0, palette_count = 0;
  int palette_entry_size = 4;
  if (dib_size == 12) {  // BITMAPCOREHEADER
    width = le16(bytes, 18);
    height = static_cast<std::int16_t>(le16(bytes, 20));
    bpp = le16(bytes, 24);
    palette_entry_size = 3;
  } else if (dib_size >= 40) {
    width = static_cast<std::int32_t>(le32(bytes, 18));
    height = static_cast<std::int32_t>(le32(bytes, 22));
    bpp = le16(bytes, 28);
    compression = le32(bytes, 30);
    palette_count = le32(bytes, 46);
  } else {
    throw FormatError("BMP: unsupported DIB header size " + std::to_string(dib_size));
  }
  const bool top_down = height < 0;
  height = std::abs(height);
  if (width < 1 || height < 1 || width > (1 << 20) || height > (1 << 20)) {
    throw FormatError("BMP: invalid dimensions");
  }

  std::array<std::uint32_t, 3> masks{0x00FF0000u, 0x0000FF00u, 0x000000FFu};
  if (compression == 3 && bpp == 32) {
    const std::size_t mask_off = 14 + 40;  // after a V3 header, or inside V4/V5
    masks = {le32(bytes, mask_off), le32(bytes, mask_off + 4), le32(bytes, mask_off + 8)};
  } else if (compression != 0) {
    throw FormatError("BMP: unsupported compression=" + std::to_string(compression));
  }
  if (bpp != 1 && bpp != 4 && bpp != 8 && bpp != 24 && bpp != 32) {
    throw FormatError("BMP: unsupported bit depth " + std::to_string(bpp));
  }

  std::vector<double> palette;
  if (bpp <= 8) {
    const std::size_t n = palette_count ? palette_count : (std::size_t{1} << bpp);
    const std::size_t pal_off = 14 + dib_size + (compression == 3 ? 12 : 0);
    if (pal_off + n * palette_entry_size > bytes.size()) throw FormatError("BMP: truncated palette");
    palette.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto* e = &bytes[pal_off + i * palette_entry_size];
      palette[i] = to_grayscale(e[2], e[1], e[0]);
    }
  }

  auto channel = [](std::uint32_t px, std::uint32_t mask) -> double {
    if (mask == 0) return 0.0;
    const int shift = std::countr_zero(mask);
    const std::uint32_t max = mask >> shift;
    const double v = (px & mask) >> shift;
    return max == 255 ? v : v * 255.0 / max;
  };

  const std::size_t row_bytes = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
  if (pixel_offset + row_bytes * height > bytes.size()) throw FormatError("BMP: truncated pixel data");

  GrayImage img(static_cast<int>(width), static_cast<int>(height));
  for (std::int64_t r = 0; r < height; ++r) {
    const auto* row = &bytes[pixel_offset + row_bytes * r];
    const int y = static_cast<int>(top_down ? r : height - 1 - r);
    for (std::int64_t x = 0; x < width; ++x) {
      double v;
      if (bpp <= 8) {
        const std::size_t bit = static_cast<std::size_t>(x) * bpp;
        const unsigned idx = (row[bit / 8] >> (8 - bpp - bit % 8)) & ((1u << bpp) - 1);
        if (idx >= palette.size()) throw FormatError("BMP: palette index out of range");
        v = palette[idx];
      } else if (bpp == 24) {
        const auto* p = row + x * 3;
        v = to_grayscale(p[2], p[1], p[0]);
      } else {
        const auto* p = row + x * 4;
        const std::uint32_t px = std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 |
                                 std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
        v = to_grayscale(channel(px, masks[0]), channel(px, masks[1]), channel(px, masks[2]));
      }
      img.at(static_cast<int>(x), y) = v;
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// PNG (libpng simplified API; 16-bit files are read without gamma conversion)

GrayImage decode_png(std::span<const unsigned char> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("PNG: " + msg);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool sixteen = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  image.format = (color ? PNG_FORMAT_FLAG_COLOR : 0u) | (sixteen ? PNG_FORMAT_FLAG_LINEAR : 0u);

  const int channels = color ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  GrayImage img(static_cast<int>(image.width), static_cast<int>(image.height));

  auto convert = [&](const auto* buf) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto* p = buf + i * channels;
      img.data[i] = color ? to_grayscale(p[0], p[1], p[2]) : static_cast<double>(p[0]);
    }
  };
  int ok;
  if (sixteen) {
    std::vector<png_uint_16> buf(n * channels);
    ok = png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr);
    if (ok) convert(buf.data());
  } else {
    std::vector<png_byte> buf(n * channels);
    ok = png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr);
    if (ok) convert(buf.data());
  }
  if (!ok) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("PNG: " + msg);
  }
  return img;
}

// ---------------------------------------------------------------------------
// JPEG

namespace {

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

// The caller owns every object with a destructor; this frame holds only
// trivially destructible locals so that longjmp out of libjpeg is well defined.
bool jpeg_decode_into(std::span<const unsigned char> bytes, jpeg_decompress_struct& cinfo,
                      JpegError& err, GrayImage& img, std::vector<JSAMPLE>& row) {
  if (setjmp(err.jump)) return false;
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  const bool gray = cinfo.jpeg_color_space == JCS_GRAYSCALE;
  cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  const int c = cinfo.output_components;
  img.width = w;
  img.height = h;
  img.data.resize(static_cast<std::size_t>(w) * h);
  row.resize(static_cast<std::size_t>(w) * c);
  while (cinfo.output_scanline < cinfo.output_height) {
    const int y = static_cast<int>(cinfo.output_scanline);
    JSAMPROW rows[1] = {row.data()};
    jpeg_read_scanlines(&cinfo, rows, 1);
    for (int x = 0; x < w; ++x) {
      const JSAMPLE* p = &row[static_cast<std::size_t>(x) * c];
      img.at(x, y) = c == 1 ? p[0] : to_grayscale(p[0], p[1], p[2]);
    }
  }
  jpeg_finish_decompress(&cinfo);
  return true;
}

}  // namespace

GrayImage decode_jpeg(std::span<const unsigned char> bytes) {
  GrayImage img;
  std::vector<JSAMPLE> row;
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silence;
  err.message[0] = '\0';
  const bool ok = jpeg_decode_into(bytes, cinfo, err, img, row);
  jpeg_destroy_decompress(&cinfo);
  if (!ok) throw FormatError(std::string("JPEG: ") + err.message);
  return img;
}

// ---------------------------------------------------------------------------

GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  auto starts_with = [&](std::initializer_list<unsigned char> sig) {
    return bytes.size() >= sig.size() && std::equal(sig.begin(), sig.end(), bytes.begin());
  };
  GrayImage img;
  if (starts_with({'I', 'I', 42, 0}) || starts_with({'M', 'M', 0, 42}) ||
      starts_with({'I', 'I', 43, 0}) || starts_with({'M', 'M', 0, 43})) {
    img = decode_tiff(bytes);
  } else if (starts_with({0x89, 'P', 'N', 'G'})) {
    img = decode_png(bytes);
  } else if (starts_with({0xFF, 0xD8, 0xFF})) {
    img = decode_jpeg(bytes);
  } else if (starts_with({'B', 'M'})) {
    img = decode_bmp(bytes);
  } else {
    throw FormatError("'" + path.string() + "': unrecognized image signature");
  }
  validate(img);
  return img;
}

void save_float_tiff(const GrayImage& img, const std::filesystem::path& path) {
  validate(img);
  std::vector<float> samples(img.data.begin(), img.data.end());
  const tiff::FloatPage page{img.width, img.height, samples};
  write_file_bytes(path, tiff::encode_float_stack(std::span(&page, 1)));
}

GrayImage rescale_width(const GrayImage& img, int target_width) {
  validate(img);
  if (target_width < 2) throw ParameterError("rescale target width must be >= 2");
  const long target_height =
      std::lround(static_cast<double>(img.height) * target_width / img.width);
  if (target_height < 2) {
    throw GeometryError("rescaled height " + std::to_string(target_height) + " is below 2 pixels");
  }
  GrayImage out;
  if (target_width == img.width) {
    out = img;
    return out;
  }
  out = GrayImage(target_width, static_cast<int>(target_height));
  if (img.pixel_size_nm) {
    out.pixel_size_nm = *img.pixel_size_nm * img.width / target_width;
  }

  // Source coordinate of each destination pixel centre, clamped to the edge.
  auto axis = [](int src_n, int dst_n) {
    struct Tap {
      int i0, i1;
      double t;
    };
    std::vector<Tap> taps(dst_n);
    const double scale = static_cast<double>(src_n) / dst_n;
    for (int i = 0; i < dst_n; ++i) {
      double f = (i + 0.5) * scale - 0.5;
      f = std::clamp(f, 0.0, static_cast<double>(src_n - 1));
      const int i0 = static_cast<int>(std::floor(f));
      taps[i] = {i0, std::min(i0 + 1, src_n - 1), f - i0};
    }
    return taps;
  };
  const auto xt = axis(img.width, out.width);
  const auto yt = axis(img.height, out.height);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < out.height; ++y) {
    const auto& ty = yt[y];
    for (int x = 0; x < out.width; ++x) {
      const auto& tx = xt[x];
      const double a = img.at(tx.i0, ty.i0), b = img.at(tx.i1, ty.i0);
      const double c = img.at(tx.i0, ty.i1), d = img.at(tx.i1, ty.i1);
      const double top = a + tx.t * (b - a);
      const double bottom = c + tx.t * (d - c);
      out.at(x, y) = top + ty.t * (bottom - top);
    }
  }
  return out;
}

}  // namespace locfft
