#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "locfft/errors.hpp"
#include "locfft/tiff.hpp"
#include "synth.hpp"

using namespace locfft;

namespace {

// Little-endian 8-bit page with optional ImageDescription, XResolution and
// ResolutionUnit, laid out by hand.
struct Tag {
  unsigned tag, type;
  std::uint32_t count;
  std::vector<unsigned char> payload;
};

void put16(std::vector<unsigned char>& b, unsigned v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}
void put32(std::vector<unsigned char>& b, std::uint32_t v) {
  put16(b, v & 0xffff);
  put16(b, v >> 16);
}

Tag short_tag(unsigned tag, unsigned v) {
  Tag t{tag, 3, 1, {}};
  put16(t.payload, v);
  return t;
}
Tag long_tag(unsigned tag, std::uint32_t v) {
  Tag t{tag, 4, 1, {}};
  put32(t.payload, v);
  return t;
}
Tag ascii_tag(unsigned tag, const std::string& s) {
  Tag t{tag, 2, static_cast<std::uint32_t>(s.size() + 1), {}};
  t.payload.assign(s.begin(), s.end());
  t.payload.push_back(0);
  return t;
}
Tag rational_tag(unsigned tag, std::uint32_t num, std::uint32_t den) {
  Tag t{tag, 5, 1, {}};
  put32(t.payload, num);
  put32(t.payload, den);
  return t;
}

std::vector<unsigned char> build(int w, int h, const std::vector<unsigned char>& pixels, std::vector<Tag> extra,
                                 unsigned photometric = 1) {
  std::vector<Tag> tags{long_tag(256, w), long_tag(257, h), short_tag(258, 8), short_tag(259, 1),
                        short_tag(262, photometric), long_tag(273, 0), short_tag(277, 1), long_tag(278, h),
                        long_tag(279, static_cast<std::uint32_t>(pixels.size()))};
  for (auto& t : extra) tags.push_back(std::move(t));
  std::sort(tags.begin(), tags.end(), [](const Tag& a, const Tag& b) { return a.tag < b.tag; });

  const std::uint32_t ifd_size = 2 + 12 * static_cast<std::uint32_t>(tags.size()) + 4;
  std::uint32_t cursor = 8 + ifd_size;
  std::vector<std::uint32_t> offsets(tags.size(), 0);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].payload.size() > 4) {
      offsets[i] = cursor;
      cursor += static_cast<std::uint32_t>(tags[i].payload.size());
    }
  }
  const std::uint32_t data_offset = cursor;

  std::vector<unsigned char> b{'I', 'I'};
  put16(b, 42);
  put32(b, 8);
  put16(b, static_cast<unsigned>(tags.size()));
  for (std::size_t i = 0; i < tags.size(); ++i) {
    Tag& t = tags[i];
    if (t.tag == 273) {
      t.payload.clear();
      put32(t.payload, data_offset);
    }
    put16(b, t.tag);
    put16(b, t.type);
    put32(b, t.count);
    if (t.payload.size() > 4) {
      put32(b, offsets[i]);
    } else {
      std::vector<unsigned char> v = t.payload;
      v.resize(4, 0);
      b.insert(b.end(), v.begin(), v.end());
    }
  }
  put32(b, 0);
  for (const Tag& t : tags) {
    if (t.payload.size() > 4) b.insert(b.end(), t.payload.begin(), t.payload.end());
  }
  b.insert(b.end(), pixels.begin(), pixels.end());
  return b;
}

}  // namespace

TEST(Tiff, FloatStackRoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  std::normal_distribution<float> n(0.0f, 1e3f);
  std::vector<std::vector<float>> data(4);
  std::vector<tiff::FloatPage> pages;
  for (int p = 0; p < 4; ++p) {
    data[p].resize(7 * 5);
    for (float& v : data[p]) v = n(rng);
    data[p][0] = -0.0f;
    data[p][1] = std::numeric_limits<float>::denorm_min();
    pages.push_back({7, 5, data[p]});
  }
  const auto bytes = tiff::encode_float_stack(pages, "hello");
  EXPECT_EQ(bytes[0], 'I');
  EXPECT_EQ(bytes[1], 'I');
  const auto back = tiff::decode(bytes);
  ASSERT_EQ(back.size(), 4u);
  for (int p = 0; p < 4; ++p) {
    EXPECT_TRUE(back[p].is_float);
    EXPECT_EQ(back[p].bits_per_sample, 32);
    ASSERT_EQ(back[p].width, 7);
    ASSERT_EQ(back[p].height, 5);
    for (int i = 0; i < 35; ++i) {
      const float f = static_cast<float>(back[p].samples[i]);
      EXPECT_EQ(std::memcmp(&f, &data[p][i], 4), 0) << "page " << p << " sample " << i;
    }
  }
}

TEST(Tiff, SinglePixelHalf) {
  const float v = 0.5f;
  const tiff::FloatPage page{1, 1, std::span<const float>(&v, 1)};
  const auto back = tiff::decode(tiff::encode_float_stack(std::span(&page, 1)));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].samples[0], 0.5);
}

TEST(Tiff, EmptyStackRejected) {
  EXPECT_THROW(tiff::encode_float_stack(std::span<const tiff::FloatPage>{}), ParameterError);
}

TEST(Tiff, BigEndian16Bit) {
  const auto back = tiff::decode(synth::tiff_bytes(2, 2, 16, {1, 256, 4097, 65535}, true));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].samples, (std::vector<double>{1, 256, 4097, 65535}));
}

TEST(Tiff, WhiteIsZeroInverted) {
  const auto bytes = build(2, 1, {0, 200}, {}, 0);
  EXPECT_EQ(tiff::decode(bytes)[0].samples, (std::vector<double>{255, 55}));
}

TEST(Tiff, RgbRejectedByName) {
  const auto bytes = build(1, 1, {0}, {}, 2);
  try {
    tiff::decode(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("PhotometricInterpretation"), std::string::npos);
  }
}

TEST(Tiff, ImageJNanometrePixelSize) {
  // 1 / 1.805 pixels per nm, stored as a rational.
  const auto bytes = build(2, 1, {1, 2}, {ascii_tag(270, "ImageJ=1.53t\nunit=nm\n"),
                                          rational_tag(282, 1000000, 1805000), short_tag(296, 1)});
  const auto page = tiff::decode(bytes)[0];
  ASSERT_TRUE(page.pixel_size_nm.has_value());
  EXPECT_NEAR(*page.pixel_size_nm, 1.805, 1e-12);
}

TEST(Tiff, ImageJMicronPixelSize) {
  // 3 um over 1662 px: 554 pixels per micron.
  const auto bytes =
      build(1, 1, {0}, {ascii_tag(270, "ImageJ=1.53t\nunit=micron\n"), rational_tag(282, 554, 1)});
  EXPECT_NEAR(*tiff::decode(bytes)[0].pixel_size_nm, 1000.0 / 554.0, 1e-12);
}

TEST(Tiff, CentimetreResolutionUnit) {
  const auto bytes = build(1, 1, {0}, {rational_tag(282, 5000000, 1), short_tag(296, 3)});
  EXPECT_NEAR(*tiff::decode(bytes)[0].pixel_size_nm, 2.0, 1e-12);
}

TEST(Tiff, InchResolutionIsNotAPixelSize) {
  const auto bytes = build(1, 1, {0}, {rational_tag(282, 72, 1), short_tag(296, 2)});
  EXPECT_FALSE(tiff::decode(bytes)[0].pixel_size_nm.has_value());
}

TEST(Tiff, BadMagic) {
  auto bytes = synth::tiff_bytes(1, 1, 8, {0}, false);
  bytes[2] = 41;
  EXPECT_THROW(tiff::decode(bytes), FormatError);
}

TEST(Tiff, ShortHeader) {
  const std::vector<unsigned char> b{'I', 'I', 42};
  EXPECT_THROW(tiff::decode(b), FormatError);
}

TEST(Tiff, UnsupportedBitDepthNamesIt) {
  auto bytes = synth::tiff_bytes(1, 1, 8, {0}, false);
  // BitsPerSample is the third entry; its value sits 8 bytes into the entry.
  bytes[8 + 2 + 2 * 12 + 8] = 4;
  try {
    tiff::decode(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("BitsPerSample=4"), std::string::npos) << e.what();
  }
}
