#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sve/dataset.hpp"
#include "sve/image.hpp"

namespace sve {

/// Vessel enhancement strategies. All but the heatmap variant edit only the
/// HSI intensity channel; hue and saturation pass through untouched.
enum class SveVariant {
  kVesselOnly,               // I * mask, background black
  kWeightedPlusOrigin,       // I + mask * 255 * weight, clamped
  kWeightedPlusBackground,   // normalized weighted vessels over the background
  kGammaVesselPlusOrigin,    // vessel I -> 255 * (I / 255)^gamma
  kHeatmapVesselPlusOrigin,  // vessel pixels recoloured through heatmap_lut()
};

std::string_view to_string(SveVariant variant);
/// Accepts vessel-only, weighted-origin, weighted-background, gamma-origin,
/// heatmap-origin. Throws Error{kInvalidArgument} otherwise.
SveVariant parse_variant(std::string_view name);

struct SveStrategy {
  SveVariant variant = SveVariant::kWeightedPlusBackground;
  double weight = 0.2;
  double gamma = 0.5;

  void validate() const;
};

/// The intensity planes produced by the weighted-background strategy, all on
/// the 0-255 scale.
struct SveIntermediates {
  Plane i_background;
  Plane i_enhanced;
  Plane i_enhanced_normalized;
  Plane i_enhanced_normalized_vessel;
  Plane i_new;
  /// max(I_enhanced) == min(I_enhanced); the normalized plane is then 128.
  bool degenerate_normalization = false;
};

/// Weighted-background enhancement of an intensity plane:
///   background   = I * (1 - mask)
///   enhanced     = I + mask * 255 * weight
///   normalized   = min-max stretch of `enhanced` onto [0, 255]
///   vessel       = normalized * mask
///   new          = clamp(background + vessel, 0, 255)
SveIntermediates enhance_intensity(const Plane& intensity, const VesselMask& mask, double weight);

struct SveResult {
  RasterImage image;
  SveIntermediates intermediates;
};

SveResult sve_weighted_background(const RasterImage& image, const VesselMask& mask, double weight);

/// Applies an intensity-channel strategy in HSI space. Throws for the
/// heatmap variant, which works on RGB.
HsiImage enhance_hsi(const HsiImage& image, const VesselMask& mask, const SveStrategy& strategy);

RasterImage sve_apply(const RasterImage& image, const VesselMask& mask, const SveStrategy& strategy);

/// 256-entry blue-to-red lookup used by the heatmap strategy. Entry v:
///   v in [0,64)    -> (0,           4v,             255)
///   v in [64,128)  -> (0,           255,            255 - 4(v-64))
///   v in [128,192) -> (4(v-128),    255,            0)
///   v in [192,256) -> (255,         255 - 4(v-192), 0)
const std::array<Rgb, 256>& heatmap_lut();

struct RowError {
  std::string id;
  std::string message;
};

struct BatchEnhanceResult {
  Manifest manifest;  // successful rows, `image` pointing at the output file
  std::vector<RowError> errors;
};

/// Output file name for a sample: `<id>_sve.png`.
std::string enhanced_file_name(std::string_view id);

/// Enhances every row of `input` into `out_dir`. Row failures (missing mask,
/// unreadable file, size mismatch) are collected instead of aborting.
BatchEnhanceResult batch_enhance(const Manifest& input, const SveStrategy& strategy,
                                 const std::filesystem::path& out_dir, unsigned jobs = 1);

}  // namespace sve
