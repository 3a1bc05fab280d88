#include "sve/enhancement.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <optional>

#include "sve/error.hpp"
#include "sve/parallel.hpp"
#include "sve/raster_io.hpp"

namespace sve {

namespace {

void require_same_size(int w, int h, const VesselMask& mask) {
  if (w != mask.width() || h != mask.height()) {
    fail(ErrorCode::kDimensionMismatch, "image is " + std::to_string(w) + "x" + std::to_string(h) +
                                            " but mask is " + std::to_string(mask.width()) + "x" +
                                            std::to_string(mask.height()));
  }
}

}  // namespace

std::string_view to_string(SveVariant variant) {
  switch (variant) {
    case SveVariant::kVesselOnly: return "vessel-only";
    case SveVariant::kWeightedPlusOrigin: return "weighted-origin";
    case SveVariant::kWeightedPlusBackground: return "weighted-background";
    case SveVariant::kGammaVesselPlusOrigin: return "gamma-origin";
    case SveVariant::kHeatmapVesselPlusOrigin: return "heatmap-origin";
  }
  return "unknown";
}

SveVariant parse_variant(std::string_view name) {
  for (auto v : {SveVariant::kVesselOnly, SveVariant::kWeightedPlusOrigin, SveVariant::kWeightedPlusBackground,
                 SveVariant::kGammaVesselPlusOrigin, SveVariant::kHeatmapVesselPlusOrigin}) {
    if (to_string(v) == name) return v;
  }
  fail(ErrorCode::kInvalidArgument, "unknown enhancement strategy '" + std::string(name) + "'");
}

void SveStrategy::validate() const {
  if (!(weight >= 0.0) || !std::isfinite(weight)) fail(ErrorCode::kInvalidArgument, "weight must be >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorCode::kInvalidArgument, "gamma must be > 0");
}

SveIntermediates enhance_intensity(const Plane& intensity, const VesselMask& mask, double weight) {
  require_same_size(intensity.width(), intensity.height(), mask);
  const int w = intensity.width(), h = intensity.height();
  SveIntermediates out{Plane(w, h), Plane(w, h), Plane(w, h), Plane(w, h), Plane(w, h), false};

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mask(x, y);
      const double i = intensity(x, y);
      out.i_background(x, y) = i * (1.0 - m);
      const double e = i + m * 255.0 * weight;
      out.i_enhanced(x, y) = e;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  }
  out.degenerate_normalization = !(hi > lo);
  const double range = hi - lo;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double n = out.degenerate_normalization ? 128.0 : (out.i_enhanced(x, y) - lo) / range * 255.0;
      out.i_enhanced_normalized(x, y) = n;
      const double v = n * mask(x, y);
      out.i_enhanced_normalized_vessel(x, y) = v;
      out.i_new(x, y) = std::clamp(out.i_background(x, y) + v, 0.0, 255.0);
    }
  }
  return out;
}

SveResult sve_weighted_background(const RasterImage& image, const VesselMask& mask, double weight) {
  SveStrategy{SveVariant::kWeightedPlusBackground, weight, 0.5}.validate();
  require_same_size(image.width(), image.height(), mask);
  HsiImage hsi = rgb_to_hsi(image);
  auto inter = enhance_intensity(hsi.intensity, mask, weight);
  hsi.intensity = inter.i_new;
  return {hsi_to_rgb(hsi), std::move(inter)};
}

HsiImage enhance_hsi(const HsiImage& image, const VesselMask& mask, const SveStrategy& strategy) {
  strategy.validate();
  require_same_size(image.width(), image.height(), mask);
  HsiImage out = image;
  Plane& intensity = out.intensity;
  const int w = image.width(), h = image.height();
  switch (strategy.variant) {
    case SveVariant::kWeightedPlusBackground:
      intensity = enhance_intensity(image.intensity, mask, strategy.weight).i_new;
      break;
    case SveVariant::kVesselOnly:
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) intensity(x, y) *= mask(x, y);
      break;
    case SveVariant::kWeightedPlusOrigin:
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          intensity(x, y) = std::min(255.0, intensity(x, y) + mask(x, y) * 255.0 * strategy.weight);
      break;
    case SveVariant::kGammaVesselPlusOrigin:
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (mask(x, y)) intensity(x, y) = 255.0 * std::pow(intensity(x, y) / 255.0, strategy.gamma);
      break;
    case SveVariant::kHeatmapVesselPlusOrigin:
      fail(ErrorCode::kInvalidArgument, "heatmap strategy operates in RGB, not on the intensity channel");
  }
  return out;
}

const std::array<Rgb, 256>& heatmap_lut() {
  static const std::array<Rgb, 256> lut = [] {
    std::array<Rgb, 256> t{};
    for (int v = 0; v < 256; ++v) {
      const auto u = [](int x) { return static_cast<std::uint8_t>(x); };
      if (v < 64) t[v] = {0, u(4 * v), 255};
      else if (v < 128) t[v] = {0, 255, u(255 - 4 * (v - 64))};
      else if (v < 192) t[v] = {u(4 * (v - 128)), 255, 0};
      else t[v] = {255, u(255 - 4 * (v - 192)), 0};
    }
    return t;
  }();
  return lut;
}

RasterImage sve_apply(const RasterImage& image, const VesselMask& mask, const SveStrategy& strategy) {
  strategy.validate();
  require_same_size(image.width(), image.height(), mask);
  if (strategy.variant == SveVariant::kHeatmapVesselPlusOrigin) {
    RasterImage out = image;
    const auto& lut = heatmap_lut();
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        if (!mask(x, y)) continue;
        out.set(x, y, lut[quantize(rgb_to_hsi(image.at(x, y)).i)]);
      }
    }
    return out;
  }
  return hsi_to_rgb(enhance_hsi(rgb_to_hsi(image), mask, strategy));
}

std::string enhanced_file_name(std::string_view id) {
  return std::string(id) + "_sve.png";
}

BatchEnhanceResult batch_enhance(const Manifest& input, const SveStrategy& strategy,
                                 const std::filesystem::path& out_dir, unsigned jobs) {
  strategy.validate();
  input.validate();
  std::filesystem::create_directories(out_dir);
  const std::size_t n = input.records.size();
  std::vector<std::optional<std::string>> errors(n);
  std::vector<std::filesystem::path> outputs(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto& r = input.records[i];
    try {
      if (!r.mask) fail(ErrorCode::kNotFound, "no mask listed");
      const auto image = load_raster(r.image);
      const auto mask = load_mask(*r.mask);
      const auto out_path = (out_dir / enhanced_file_name(r.id)).lexically_normal();
      save_raster(sve_apply(image, mask, strategy), out_path);
      outputs[i] = out_path;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  BatchEnhanceResult result;
  result.manifest.name = input.name;
  result.manifest.class_names = input.class_names;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      result.errors.push_back({input.records[i].id, *errors[i]});
      continue;
    }
    auto r = input.records[i];
    r.image = outputs[i];
    result.manifest.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace sve
