#include "locfft/tiff.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>

#include "locfft/errors.hpp"

namespace locfft::tiff {
namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kImageDescription = 270,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kXResolution = 282,
  kPlanarConfig = 284,
  kResolutionUnit = 296,
  kTileWidth = 322,
  kSampleFormat = 339,
};

enum FieldType : std::uint16_t {
  kByte = 1,
  kAscii = 2,
  kShort = 3,
  kLong = 4,
  kRational = 5,
  kFloat = 11,
  kDouble = 12,
};

int type_size(std::uint16_t type) {
  switch (type) {
    case kByte:
    case kAscii:
    case 6:  // SBYTE
    case 7:  // UNDEFINED
      return 1;
    case kShort:
    case 8:  // SSHORT
      return 2;
    case kLong:
    case 9:  // SLONG
    case kFloat:
    case 13:  // IFD
      return 4;
    case kRational:
    case 10:  // SRATIONAL
    case kDouble:
      return 8;
    default:
      return 0;
  }
}

class Reader {
 public:
  Reader(std::span<const unsigned char> bytes, bool big_endian)
      : bytes_(bytes), big_(big_endian) {}

  void need(std::size_t offset, std::size_t count) const {
    if (offset > bytes_.size() || count > bytes_.size() - offset) {
      throw FormatError("TIFF: truncated file (need " + std::to_string(count) +
                        " bytes at offset " + std::to_string(offset) + ")");
    }
  }

  std::uint16_t u16(std::size_t off) const {
    need(off, 2);
    const auto* p = bytes_.data() + off;
    return big_ ? static_cast<std::uint16_t>(p[0] << 8 | p[1])
                : static_cast<std::uint16_t>(p[1] << 8 | p[0]);
  }

  std::uint32_t u32(std::size_t off) const {
    need(off, 4);
    const auto* p = bytes_.data() + off;
    if (big_) {
      return std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 | p[3];
    }
    return std::uint32_t{p[3]} << 24 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[1]} << 8 | p[0];
  }

  float f32(std::size_t off) const { return std::bit_cast<float>(u32(off)); }

  double f64(std::size_t off) const {
    std::uint64_t hi = u32(off), lo = u32(off + 4);
    if (!big_) std::swap(hi, lo);
    return std::bit_cast<double>(hi << 32 | lo);
  }

  std::uint8_t u8(std::size_t off) const {
    need(off, 1);
    return bytes_[off];
  }

  std::span<const unsigned char> bytes() const { return bytes_; }

 private:
  std::span<const unsigned char> bytes_;
  bool big_;
};

struct Entry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t data_offset = 0;  // absolute offset of the value array
};

// Numeric value `index` of an entry, whatever its integral/float type.
double entry_value(const Reader& r, const Entry& e, std::size_t index) {
  if (index >= e.count) throw FormatError("TIFF: tag value index out of range");
  const std::size_t off = e.data_offset + index * type_size(e.type);
  switch (e.type) {
    case kByte:
    case 7:
      return r.u8(off);
    case kShort:
      return r.u16(off);
    case kLong:
      return r.u32(off);
    case kRational: {
      const double den = r.u32(off + 4);
      return den == 0.0 ? 0.0 : r.u32(off) / den;
    }
    case kFloat:
      return r.f32(off);
    case kDouble:
      return r.f64(off);
    default:
      throw FormatError("TIFF: unsupported field type " + std::to_string(e.type));
  }
}

std::string entry_string(const Reader& r, const Entry& e) {
  r.need(e.data_offset, e.count);
  const auto* p = reinterpret_cast<const char*>(r.bytes().data() + e.data_offset);
  std::string s(p, e.count);
  if (auto nul = s.find('\0'); nul != std::string::npos) s.resize(nul);
  return s;
}

// ImageJ writes "unit=nm" / "unit=micron" into the description and pixels-per-unit
// into XResolution.
std::optional<double> pixel_size_from_tags(const std::string& description,
                                           std::optional<double> xres,
                                           std::optional<double> res_unit) {
  if (!xres || *xres <= 0.0 || !std::isfinite(*xres)) return std::nullopt;
  auto unit_pos = description.find("unit=");
  if (unit_pos != std::string::npos) {
    auto end = description.find('\n', unit_pos);
    std::string unit = description.substr(unit_pos + 5, end == std::string::npos ? std::string::npos
                                                                                 : end - unit_pos - 5);
    if (unit == "nm") return 1.0 / *xres;
    if (unit == "micron" || unit == "um" || unit == "\\u00B5m" || unit == "\xC2\xB5m") {
      return 1000.0 / *xres;
    }
    return std::nullopt;
  }
  if (res_unit && *res_unit == 3.0) return 1e7 / *xres;  // pixels per centimetre
  return std::nullopt;
}

Page decode_page(const Reader& r, std::size_t ifd_offset, std::size_t* next_ifd) {
  const std::uint16_t n_entries = r.u16(ifd_offset);
  r.need(ifd_offset + 2, std::size_t{n_entries} * 12 + 4);

  std::map<std::uint16_t, Entry> tags;
  for (std::uint16_t i = 0; i < n_entries; ++i) {
    const std::size_t e_off = ifd_offset + 2 + std::size_t{i} * 12;
    Entry e;
    const std::uint16_t tag = r.u16(e_off);
    e.type = r.u16(e_off + 2);
    e.count = r.u32(e_off + 4);
    const int tsize = type_size(e.type);
    if (tsize == 0) continue;  // unknown types are skipped, as readers are required to
    const std::uint64_t total = std::uint64_t{e.count} * tsize;
    e.data_offset = total <= 4 ? e_off + 8 : r.u32(e_off + 8);
    tags[tag] = e;
  }
  *next_ifd = r.u32(ifd_offset + 2 + std::size_t{n_entries} * 12);

  auto get = [&](std::uint16_t tag) -> std::optional<double> {
    auto it = tags.find(tag);
    if (it == tags.end() || it->second.count == 0) return std::nullopt;
    return entry_value(r, it->second, 0);
  };
  auto require = [&](std::uint16_t tag, const char* name) {
    auto v = get(tag);
    if (!v) throw FormatError(std::string("TIFF: missing required tag ") + name);
    return *v;
  };

  if (tags.contains(kTileWidth)) throw FormatError("TIFF: tiled layout is not supported");

  Page page;
  page.width = static_cast<int>(require(kImageWidth, "ImageWidth"));
  page.height = static_cast<int>(require(kImageLength, "ImageLength"));
  if (page.width < 1 || page.height < 1) {
    throw FormatError("TIFF: invalid dimensions " + std::to_string(page.width) + "x" +
                      std::to_string(page.height));
  }

  const int spp = static_cast<int>(get(kSamplesPerPixel).value_or(1));
  if (spp != 1) {
    throw FormatError("TIFF: unsupported SamplesPerPixel=" + std::to_string(spp) +
                      " (grayscale only)");
  }
  const int compression = static_cast<int>(get(kCompression).value_or(1));
  if (compression != 1) {
    throw FormatError("TIFF: unsupported Compression=" + std::to_string(compression) +
                      " (uncompressed only)");
  }
  const int planar = static_cast<int>(get(kPlanarConfig).value_or(1));
  if (planar != 1) throw FormatError("TIFF: unsupported PlanarConfiguration=" + std::to_string(planar));

  page.bits_per_sample = static_cast<int>(get(kBitsPerSample).value_or(1));
  const int sample_format = static_cast<int>(get(kSampleFormat).value_or(1));
  const int photometric = static_cast<int>(get(kPhotometric).value_or(1));

  const int bps = page.bits_per_sample;
  const bool ok = (sample_format == 1 && (bps == 8 || bps == 16)) || (sample_format == 3 && bps == 32);
  if (!ok) {
    throw FormatError("TIFF: unsupported BitsPerSample=" + std::to_string(bps) +
                      " with SampleFormat=" + std::to_string(sample_format));
  }
  page.is_float = sample_format == 3;
  if (photometric != 0 && photometric != 1) {
    throw FormatError("TIFF: unsupported PhotometricInterpretation=" + std::to_string(photometric));
  }

  auto offsets_it = tags.find(kStripOffsets);
  auto counts_it = tags.find(kStripByteCounts);
  if (offsets_it == tags.end()) throw FormatError("TIFF: missing required tag StripOffsets");
  const auto rows_per_strip = static_cast<std::uint64_t>(
      get(kRowsPerStrip).value_or(std::numeric_limits<std::uint32_t>::max()));
  if (rows_per_strip == 0) throw FormatError("TIFF: RowsPerStrip=0");

  const std::size_t bytes_per_sample = static_cast<std::size_t>(bps / 8);
  const std::size_t row_bytes = static_cast<std::size_t>(page.width) * bytes_per_sample;
  const std::size_t n_strips = offsets_it->second.count;
  const std::uint64_t expected_strips = (page.height + rows_per_strip - 1) / rows_per_strip;
  if (n_strips < expected_strips) {
    throw FormatError("TIFF: StripOffsets has " + std::to_string(n_strips) + " entries, expected " +
                      std::to_string(expected_strips));
  }

  page.samples.resize(static_cast<std::size_t>(page.width) * page.height);
  std::size_t row = 0;
  for (std::size_t s = 0; s < expected_strips; ++s) {
    const auto strip_off = static_cast<std::size_t>(entry_value(r, offsets_it->second, s));
    const std::size_t rows_here =
        std::min<std::uint64_t>(rows_per_strip, static_cast<std::uint64_t>(page.height) - row);
    const std::size_t strip_bytes = rows_here * row_bytes;
    if (counts_it != tags.end() && counts_it->second.count > s) {
      const auto declared = static_cast<std::size_t>(entry_value(r, counts_it->second, s));
      if (declared < strip_bytes) {
        throw FormatError("TIFF: strip " + std::to_string(s) + " holds " + std::to_string(declared) +
                          " bytes, expected " + std::to_string(strip_bytes));
      }
    }
    r.need(strip_off, strip_bytes);
    const std::size_t first = row * page.width;
    const std::size_t n = rows_here * page.width;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = strip_off + i * bytes_per_sample;
      double v;
      if (bps == 8) {
        v = r.u8(off);
      } else if (bps == 16) {
        v = r.u16(off);
      } else {
        v = r.f32(off);
      }
      page.samples[first + i] = v;
    }
    row += rows_here;
  }

  if (photometric == 0 && !page.is_float) {
    const double max_value = bps == 8 ? 255.0 : 65535.0;
    for (auto& v : page.samples) v = max_value - v;
  }
  for (double v : page.samples) {
    if (!std::isfinite(v)) throw FormatError("TIFF: non-finite float sample");
  }

  std::string description;
  if (auto it = tags.find(kImageDescription); it != tags.end() && it->second.type == kAscii) {
    description = entry_string(r, it->second);
  }
  page.pixel_size_nm = pixel_size_from_tags(description, get(kXResolution), get(kResolutionUnit));
  return page;
}

// Little-endian byte sink.
class Writer {
 public:
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<unsigned char>(v));
    out_.push_back(static_cast<unsigned char>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void patch_u32(std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_[at + i] = static_cast<unsigned char>(v >> (8 * i));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void pad_to_word() {
    if (out_.size() % 2) out_.push_back(0);
  }
  std::size_t size() const { return out_.size(); }
  std::vector<unsigned char> take() { return std::move(out_); }

 private:
  std::vector<unsigned char> out_;
};

}  // namespace

std::vector<Page> decode(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8) throw FormatError("TIFF: file shorter than header");
  bool big;
  if (bytes[0] == 'I' && bytes[1] == 'I') {
    big = false;
  } else if (bytes[0] == 'M' && bytes[1] == 'M') {
    big = true;
  } else {
    throw FormatError("TIFF: bad byte-order mark");
  }
  Reader r(bytes, big);
  const std::uint16_t magic = r.u16(2);
  if (magic == 43) throw FormatError("TIFF: BigTIFF is not supported");
  if (magic != 42) throw FormatError("TIFF: bad magic number " + std::to_string(magic));

  std::vector<Page> pages;
  std::size_t ifd = r.u32(4);
  std::size_t guard = 0;
  while (ifd != 0) {
    if (++guard > 100000) throw FormatError("TIFF: IFD chain does not terminate");
    std::size_t next = 0;
    pages.push_back(decode_page(r, ifd, &next));
    ifd = next;
  }
  if (pages.empty()) throw FormatError("TIFF: no image directory");
  return pages;
}

std::vector<unsigned char> encode_float_stack(std::span<const FloatPage> pages,
                                              const std::string& description) {
  if (pages.empty()) throw ParameterError("TIFF: at least one page is required");
  Writer w;
  w.bytes("II", 2);
  w.u16(42);
  std::size_t prev_link = w.size();
  w.u32(0);  // patched with the first IFD offset

  for (std::size_t p = 0; p < pages.size(); ++p) {
    const auto& page = pages[p];
    const std::size_t n = static_cast<std::size_t>(page.width) * page.height;
    if (page.width < 1 || page.height < 1 || page.samples.size() != n) {
      throw GeometryError("TIFF: page " + std::to_string(p) + " has inconsistent dimensions");
    }
    const std::size_t data_offset = w.size();
    if constexpr (std::endian::native == std::endian::little) {
      w.bytes(page.samples.data(), n * sizeof(float));
    } else {
      for (float v : page.samples) w.u32(std::bit_cast<std::uint32_t>(v));
    }
    w.pad_to_word();

    const bool with_desc = p == 0 && description.size() >= 4;  // shorter strings would sit inline
    const std::size_t desc_len = description.size() + 1;
    const std::uint16_t n_entries = with_desc ? 12 : 11;
    const std::size_t ifd_offset = w.size();
    const std::size_t desc_offset = ifd_offset + 2 + std::size_t{n_entries} * 12 + 4;
    w.patch_u32(prev_link, static_cast<std::uint32_t>(ifd_offset));

    auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
      w.u16(tag);
      w.u16(type);
      w.u32(count);
      if (type == kShort && count == 1) {
        w.u16(static_cast<std::uint16_t>(value));
        w.u16(0);
      } else {
        w.u32(value);
      }
    };
    w.u16(n_entries);
    entry(kImageWidth, kLong, 1, page.width);
    entry(kImageLength, kLong, 1, page.height);
    entry(kBitsPerSample, kShort, 1, 32);
    entry(kCompression, kShort, 1, 1);
    entry(kPhotometric, kShort, 1, 1);
    if (with_desc) entry(kImageDescription, kAscii, static_cast<std::uint32_t>(desc_len),
                         static_cast<std::uint32_t>(desc_offset));
    entry(kStripOffsets, kLong, 1, static_cast<std::uint32_t>(data_offset));
    entry(kSamplesPerPixel, kShort, 1, 1);
    entry(kRowsPerStrip, kLong, 1, page.height);
    entry(kStripByteCounts, kLong, 1, static_cast<std::uint32_t>(n * sizeof(float)));
    entry(kPlanarConfig, kShort, 1, 1);
    entry(kSampleFormat, kShort, 1, 3);
    prev_link = w.size();
    w.u32(0);
    if (with_desc) {
      w.bytes(description.c_str(), desc_len);
      w.pad_to_word();
    }
    if (w.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw ParameterError("TIFF: stack exceeds the 4 GiB classic TIFF limit");
    }
  }
  return w.take();
}

}  // namespace locfft::tiff
