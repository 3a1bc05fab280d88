#include <gtest/gtest.h>
#include <png.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "sve/error.hpp"
#include "sve/image.hpp"
#include "sve/raster_io.hpp"
#include "test_support.hpp"

using namespace sve;
namespace fs = std::filesystem;

namespace {

// Straight-line arccos HSI, written independently of the library.
Hsi oracle_hsi(double r, double g, double b) {
  const double sum = r + g + b;
  Hsi out;
  out.i = sum / 3.0;
  const double mn = std::min({r, g, b});
  out.s = sum > 0 ? 1.0 - 3.0 * mn / sum : 0.0;
  if (out.s == 0.0) return out;
  const double num = 0.5 * ((r - g) + (r - b));
  const double den = std::sqrt((r - g) * (r - g) + (r - b) * (g - b));
  double theta = std::acos(std::clamp(num / den, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  out.h = b <= g ? theta : 360.0 - theta;
  if (out.h >= 360.0) out.h -= 360.0;
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST(Hsi, AchromaticPixel) {
  const auto hsi = rgb_to_hsi(Rgb{100, 100, 100});
  EXPECT_EQ(hsi.h, 0.0);
  EXPECT_EQ(hsi.s, 0.0);
  EXPECT_EQ(hsi.i, 100.0);
  EXPECT_EQ(hsi_to_rgb(Hsi{0, 0, 42}), (Rgb{42, 42, 42}));
}

TEST(Hsi, PrimaryColours) {
  const auto red = rgb_to_hsi(Rgb{255, 0, 0});
  EXPECT_NEAR(red.h, 0.0, 1e-9);
  EXPECT_NEAR(red.s, 1.0, 1e-12);
  EXPECT_NEAR(red.i, 85.0, 1e-12);
  EXPECT_EQ(hsi_to_rgb(Hsi{0, 1, 85}), (Rgb{255, 0, 0}));
  EXPECT_NEAR(rgb_to_hsi(Rgb{0, 255, 0}).h, 120.0, 1e-9);
  EXPECT_NEAR(rgb_to_hsi(Rgb{0, 0, 255}).h, 240.0, 1e-9);
}

TEST(Hsi, MatchesOracleAndRoundTrips) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int n = 0; n < 10000; ++n) {
    const Rgb px{static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                 static_cast<std::uint8_t>(byte(rng))};
    const auto hsi = rgb_to_hsi(px);
    const auto ref = oracle_hsi(px.r, px.g, px.b);
    ASSERT_EQ(hsi.i, (px.r + px.g + px.b) / 3.0);
    ASSERT_NEAR(hsi.s, ref.s, 1e-12);
    ASSERT_NEAR(hsi.h, ref.h, 1e-9);
    ASSERT_GE(hsi.h, 0.0);
    ASSERT_LT(hsi.h, 360.0);
    ASSERT_EQ(hsi.s == 0.0, px.r == px.g && px.g == px.b);
    const auto back = hsi_to_rgb(hsi);
    ASSERT_LE(std::abs(back.r - px.r), 1);
    ASSERT_LE(std::abs(back.g - px.g), 1);
    ASSERT_LE(std::abs(back.b - px.b), 1);
  }
}

TEST(Hsi, RandomValidTriplesComposeBack) {
  // hsi -> rgb -> hsi -> rgb is stable within one step.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> h(0, 360), s(0, 1), i(0, 255);
  for (int n = 0; n < 10000; ++n) {
    const auto rgb = hsi_to_rgb(Hsi{h(rng), s(rng), i(rng)});
    const auto again = hsi_to_rgb(rgb_to_hsi(rgb));
    ASSERT_LE(std::abs(again.r - rgb.r), 1);
    ASSERT_LE(std::abs(again.g - rgb.g), 1);
    ASSERT_LE(std::abs(again.b - rgb.b), 1);
  }
}

TEST(Hsi, ImageLevelConversion) {
  std::mt19937_64 rng(13);
  const auto img = support::random_image(9, 7, rng);
  const auto hsi = rgb_to_hsi(img);
  ASSERT_EQ(hsi.width(), 9);
  ASSERT_EQ(hsi.height(), 7);
  const auto back = hsi_to_rgb(hsi);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      for (int c = 0; c < 3; ++c) ASSERT_LE(std::abs(back.channel(x, y, c) - img.channel(x, y, c)), 1);
    }
  }
}

TEST(Image, Grayscale) {
  RasterImage img(2, 1);
  img.set(0, 0, {255, 255, 255});
  img.set(1, 0, {255, 0, 0});
  const auto g = to_grayscale(img);
  EXPECT_NEAR(g(0, 0), 255.0, 1e-9);
  EXPECT_NEAR(g(1, 0), 76.245, 1e-9);
  const auto flat = to_grayscale(RasterImage(4, 3, {10, 20, 30}));
  for (double v : flat.values()) EXPECT_DOUBLE_EQ(v, flat(0, 0));
}

TEST(Image, QuantizeRoundsHalfUpAndClamps) {
  EXPECT_EQ(quantize(-3.0), 0);
  EXPECT_EQ(quantize(300.0), 255);
  EXPECT_EQ(quantize(2.5), 3);
  EXPECT_EQ(quantize(2.4999), 2);
}

TEST(Image, ResizeKeepsConstantsAndIdentity) {
  std::mt19937_64 rng(14);
  const auto img = support::random_image(6, 5, rng);
  EXPECT_EQ(resize_bilinear(img, 6, 5), img);
  const auto flat = resize_bilinear(RasterImage(5, 5, {7, 8, 9}), 13, 4);
  EXPECT_EQ(flat, RasterImage(13, 4, {7, 8, 9}));
}

TEST(Mask, RejectsNonBinary) {
  EXPECT_EQ(code_of([] { VesselMask(2, 1, std::vector<std::uint8_t>{0, 2}); }), ErrorCode::kMalformed);
  RasterImage r(2, 1);
  r.set(0, 0, {255, 255, 255});
  r.set(1, 0, {1, 1, 1});
  const auto m = VesselMask::from_raster(r);
  EXPECT_EQ(m.vessel_count(), 2u);
  r.set(1, 0, {128, 128, 128});
  EXPECT_EQ(code_of([&] { VesselMask::from_raster(r); }), ErrorCode::kMalformed);
}

TEST(RasterIo, PngAndPpmRoundTripBitExact) {
  support::TempDir dir;
  std::mt19937_64 rng(15);
  for (const char* name : {"a.png", "a.ppm"}) {
    for (auto [w, h] : {std::pair{2, 2}, std::pair{17, 3}}) {
      const auto img = support::random_image(w, h, rng);
      save_raster(img, dir / name);
      EXPECT_EQ(load_raster(dir / name), img) << name;
    }
  }
}

TEST(RasterIo, ExternalPpmFixture) {
  support::TempDir dir;
  // Hand-written P6 with a comment in the header.
  write_bytes(dir / "black.ppm", "P6\n# made by hand\n16 16\n255\n" + std::string(768, '\0'));
  const auto img = load_raster(dir / "black.ppm");
  ASSERT_EQ(img.width(), 16);
  ASSERT_EQ(img.height(), 16);
  ASSERT_EQ(img.bytes().size(), 768u);
  for (auto b : img.bytes()) EXPECT_EQ(b, 0);
}

TEST(RasterIo, ErrorsAreDistinct) {
  support::TempDir dir;
  EXPECT_EQ(code_of([&] { load_raster(dir / "missing.png"); }), ErrorCode::kNotFound);

  std::mt19937_64 rng(16);
  save_raster(support::random_image(32, 32, rng), dir / "full.png");
  const auto bytes = support::slurp(dir / "full.png");
  write_bytes(dir / "trunc.png", bytes.substr(0, bytes.size() / 2));
  EXPECT_EQ(code_of([&] { load_raster(dir / "trunc.png"); }), ErrorCode::kMalformed);

  write_bytes(dir / "trunc.ppm", "P6\n4 4\n255\n" + std::string(10, 'x'));
  EXPECT_EQ(code_of([&] { load_raster(dir / "trunc.ppm"); }), ErrorCode::kMalformed);
  write_bytes(dir / "header.ppm", "P6\n4 x\n255\n");
  EXPECT_EQ(code_of([&] { load_raster(dir / "header.ppm"); }), ErrorCode::kMalformed);
  write_bytes(dir / "garbage.png", "not an image at all");
  EXPECT_EQ(code_of([&] { load_raster(dir / "garbage.png"); }), ErrorCode::kMalformed);

  write_bytes(dir / "deep.ppm", "P6\n1 1\n65535\n" + std::string(6, '\1'));
  EXPECT_EQ(code_of([&] { load_raster(dir / "deep.ppm"); }), ErrorCode::kUnsupported);

  // 16-bit PNG through libpng's simplified writer.
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 2;
  image.height = 2;
  image.format = PNG_FORMAT_LINEAR_RGB;
  std::vector<png_uint_16> px(12, 1000);
  ASSERT_TRUE(png_image_write_to_file(&image, (dir / "deep.png").c_str(), 0, px.data(), 0, nullptr));
  EXPECT_EQ(code_of([&] { load_raster(dir / "deep.png"); }), ErrorCode::kUnsupported);

  EXPECT_EQ(code_of([&] { save_raster(RasterImage(1, 1), dir / "x.bmp"); }), ErrorCode::kUnsupported);
}

TEST(RasterIo, MaskFilesZeroOneOrZero255) {
  support::TempDir dir;
  std::mt19937_64 rng(17);
  const auto mask = support::random_mask(8, 5, rng);
  save_raster(mask.to_raster(), dir / "m255.png");
  EXPECT_EQ(load_mask(dir / "m255.png"), mask);
  RasterImage ones(8, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 8; ++x) {
      const std::uint8_t v = mask(x, y);
      ones.set(x, y, {v, v, v});
    }
  }
  save_raster(ones, dir / "m1.ppm");
  EXPECT_EQ(load_mask(dir / "m1.ppm"), mask);
}
