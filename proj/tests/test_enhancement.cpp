#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sve/enhancement.hpp"
#include "sve/error.hpp"
#include "sve/raster_io.hpp"
#include "test_support.hpp"

using namespace sve;
namespace fs = std::filesystem;

namespace {

Plane plane_of(std::initializer_list<double> row) {
  Plane p(static_cast<int>(row.size()), 1);
  int x = 0;
  for (double v : row) p(x++, 0) = v;
  return p;
}

VesselMask mask_of(std::initializer_list<int> row) {
  std::vector<std::uint8_t> v(row.begin(), row.end());
  return VesselMask(static_cast<int>(v.size()), 1, v);
}

HsiImage hsi_with_intensity(const Plane& i) {
  return {Plane(i.width(), i.height(), 30.0), Plane(i.width(), i.height(), 0.4), i};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

bool within_one(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) return false;
  for (std::size_t k = 0; k < a.bytes().size(); ++k) {
    if (std::abs(a.bytes()[k] - b.bytes()[k]) > 1) return false;
  }
  return true;
}

}  // namespace

TEST(Sve, HandEvaluatedRow) {
  const auto r = enhance_intensity(plane_of({50, 100, 200}), mask_of({0, 1, 0}), 0.2);
  EXPECT_DOUBLE_EQ(r.i_enhanced(0, 0), 50.0);
  EXPECT_DOUBLE_EQ(r.i_enhanced(1, 0), 151.0);
  EXPECT_DOUBLE_EQ(r.i_enhanced(2, 0), 200.0);
  EXPECT_DOUBLE_EQ(r.i_enhanced_normalized(0, 0), 0.0);
  EXPECT_NEAR(r.i_enhanced_normalized(1, 0), 101.0 / 150.0 * 255.0, 1e-12);
  EXPECT_NEAR(r.i_enhanced_normalized(1, 0), 171.7, 1e-9);
  EXPECT_DOUBLE_EQ(r.i_enhanced_normalized(2, 0), 255.0);
  EXPECT_DOUBLE_EQ(r.i_new(0, 0), 50.0);
  EXPECT_NEAR(r.i_new(1, 0), 171.7, 1e-9);
  EXPECT_DOUBLE_EQ(r.i_new(2, 0), 200.0);
  EXPECT_FALSE(r.degenerate_normalization);
}

TEST(Sve, EmptyMaskIsIdentity) {
  std::mt19937_64 rng(21);
  for (int n = 0; n < 20; ++n) {
    const auto img = support::random_image(9, 6, rng);
    const auto out = sve_weighted_background(img, VesselMask(9, 6), 0.2);
    EXPECT_TRUE(within_one(out.image, img));
  }
}

TEST(Sve, FullRangeWeightZeroIsExact) {
  Plane i(16, 16);
  for (int k = 0; k < 256; ++k) i(k % 16, k / 16) = k;
  std::mt19937_64 rng(22);
  const auto r = enhance_intensity(i, support::random_mask(16, 16, rng), 0.0);
  EXPECT_EQ(r.i_new, i);
}

TEST(Sve, DegenerateNormalizationIsMidGray) {
  const auto r = enhance_intensity(Plane(3, 2, 90.0), VesselMask(3, 2, 1), 0.2);
  EXPECT_TRUE(r.degenerate_normalization);
  for (double v : r.i_enhanced_normalized.values()) EXPECT_EQ(v, 128.0);
  for (double v : r.i_new.values()) EXPECT_EQ(v, 128.0);
}

TEST(Sve, IntermediateInvariants) {
  std::mt19937_64 rng(23);
  for (int n = 0; n < 30; ++n) {
    const auto img = support::random_image(12, 10, rng);
    const auto mask = support::random_mask(12, 10, rng);
    const auto hsi = rgb_to_hsi(img);
    const auto lo = enhance_intensity(hsi.intensity, mask, 0.1);
    const auto hi = enhance_intensity(hsi.intensity, mask, 0.3);
    const auto n_vals = lo.i_enhanced_normalized.values();
    EXPECT_EQ(*std::min_element(n_vals.begin(), n_vals.end()), 0.0);
    EXPECT_EQ(*std::max_element(n_vals.begin(), n_vals.end()), 255.0);
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 12; ++x) {
        EXPECT_EQ(lo.i_new(x, y), lo.i_background(x, y) + lo.i_enhanced_normalized_vessel(x, y));
        if (!mask(x, y)) EXPECT_EQ(lo.i_new(x, y), hsi.intensity(x, y));
        if (mask(x, y)) EXPECT_LE(lo.i_enhanced(x, y), hi.i_enhanced(x, y));
      }
    }
  }
}

TEST(Sve, IntensityStrategiesLeaveHueAndSaturation) {
  std::mt19937_64 rng(24);
  const auto hsi = rgb_to_hsi(support::random_image(10, 10, rng));
  const auto mask = support::random_mask(10, 10, rng);
  for (auto v : {SveVariant::kVesselOnly, SveVariant::kWeightedPlusOrigin, SveVariant::kWeightedPlusBackground,
                 SveVariant::kGammaVesselPlusOrigin}) {
    const auto out = enhance_hsi(hsi, mask, SveStrategy{v, 0.2, 0.5});
    EXPECT_EQ(out.hue, hsi.hue);
    EXPECT_EQ(out.saturation, hsi.saturation);
  }
}

TEST(Sve, StrategyExamples) {
  const auto one = mask_of({1});
  auto out = enhance_hsi(hsi_with_intensity(plane_of({200})), one, {SveVariant::kWeightedPlusOrigin, 0.2, 0.5});
  EXPECT_DOUBLE_EQ(out.intensity(0, 0), 251.0);
  out = enhance_hsi(hsi_with_intensity(plane_of({230})), one, {SveVariant::kWeightedPlusOrigin, 0.2, 0.5});
  EXPECT_DOUBLE_EQ(out.intensity(0, 0), 255.0);
  out = enhance_hsi(hsi_with_intensity(plane_of({63.75})), one, {SveVariant::kGammaVesselPlusOrigin, 0.2, 0.5});
  EXPECT_NEAR(out.intensity(0, 0), 127.5, 1e-12);
  out = enhance_hsi(hsi_with_intensity(plane_of({63.75, 80})), mask_of({0, 1}), {SveVariant::kVesselOnly, 0.2, 0.5});
  EXPECT_EQ(out.intensity(0, 0), 0.0);
  EXPECT_EQ(out.intensity(1, 0), 80.0);
}

TEST(Sve, VesselOnlyFullMaskKeepsImage) {
  std::mt19937_64 rng(25);
  const auto img = support::random_image(8, 8, rng);
  EXPECT_TRUE(within_one(sve_apply(img, VesselMask(8, 8, 1), {SveVariant::kVesselOnly, 0.2, 0.5}), img));
}

TEST(Sve, HeatmapRecoloursVesselsOnly) {
  const auto& lut = heatmap_lut();
  EXPECT_EQ(lut[0], (Rgb{0, 0, 255}));
  EXPECT_EQ(lut[64], (Rgb{0, 255, 255}));
  EXPECT_EQ(lut[128], (Rgb{0, 255, 0}));
  EXPECT_EQ(lut[192], (Rgb{255, 255, 0}));
  EXPECT_EQ(lut[255], (Rgb{255, 3, 0}));

  RasterImage img(2, 1);
  img.set(0, 0, {10, 20, 30});
  img.set(1, 0, {100, 110, 120});  // I = 110
  const auto out = sve_apply(img, mask_of({0, 1}), {SveVariant::kHeatmapVesselPlusOrigin, 0.2, 0.5});
  EXPECT_EQ(out.at(0, 0), img.at(0, 0));
  EXPECT_EQ(out.at(1, 0), lut[110]);
  EXPECT_EQ(code_of([&] { enhance_hsi(rgb_to_hsi(img), mask_of({0, 1}), {SveVariant::kHeatmapVesselPlusOrigin}); }),
            ErrorCode::kInvalidArgument);
}

TEST(Sve, Errors) {
  EXPECT_EQ(code_of([] { sve_weighted_background(RasterImage(3, 3), VesselMask(3, 4), 0.2); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { parse_variant("sharpen"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { SveStrategy{SveVariant::kVesselOnly, -0.1, 0.5}.validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { SveStrategy{SveVariant::kVesselOnly, 0.1, 0.0}.validate(); }), ErrorCode::kInvalidArgument);
  for (auto v : {SveVariant::kVesselOnly, SveVariant::kWeightedPlusOrigin, SveVariant::kWeightedPlusBackground,
                 SveVariant::kGammaVesselPlusOrigin, SveVariant::kHeatmapVesselPlusOrigin}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
}

TEST(BatchEnhance, EmptyManifest) {
  support::TempDir dir;
  const auto r = batch_enhance(Manifest{}, SveStrategy{}, dir / "out");
  EXPECT_TRUE(r.manifest.records.empty());
  EXPECT_TRUE(r.errors.empty());
}

TEST(BatchEnhance, DeterministicNamesAndRowErrors) {
  support::TempDir dir;
  const auto manifest_path = support::write_synthetic_dataset(dir / "data", {{2, 1}, 16, 5});
  auto manifest = load_manifest(manifest_path);
  ASSERT_EQ(manifest.records.size(), 3u);
  auto r = batch_enhance(manifest, SveStrategy{}, dir / "out", 2);
  ASSERT_EQ(r.manifest.records.size(), 3u);
  EXPECT_TRUE(r.errors.empty());
  for (const auto& rec : manifest.records) {
    EXPECT_TRUE(fs::exists(dir / "out" / enhanced_file_name(rec.id)));
    EXPECT_EQ(enhanced_file_name(rec.id), rec.id + "_sve.png");
  }
  // Output matches the in-memory enhancement exactly.
  const auto& first = manifest.records[0];
  EXPECT_EQ(load_raster(r.manifest.records[0].image),
            sve_weighted_background(load_raster(first.image), load_mask(*first.mask), 0.2).image);

  fs::remove(*manifest.records[1].mask);
  r = batch_enhance(manifest, SveStrategy{}, dir / "out2");
  EXPECT_EQ(r.manifest.records.size(), 2u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].id, manifest.records[1].id);

  manifest.records[0].mask.reset();
  r = batch_enhance(manifest, SveStrategy{}, dir / "out3");
  EXPECT_EQ(r.errors.size(), 2u);
}
