#include "sve/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sve/error.hpp"

namespace sve {

namespace {

void require_dimensions(int width, int height) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument,
         "image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
  }
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  require_dimensions(width, height);
  bytes_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < bytes_.size(); i += 3) {
    bytes_[i] = fill.r;
    bytes_[i + 1] = fill.g;
    bytes_[i + 2] = fill.b;
  }
}

Plane::Plane(int width, int height, double fill) : width_(width), height_(height) {
  require_dimensions(width, height);
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

VesselMask::VesselMask(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  require_dimensions(width, height);
  if (fill > 1) fail(ErrorCode::kMalformed, "mask values must be 0 or 1");
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

VesselMask::VesselMask(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  require_dimensions(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    fail(ErrorCode::kDimensionMismatch, "mask value count does not match its dimensions");
  }
  for (auto v : values_) {
    if (v > 1) fail(ErrorCode::kMalformed, "mask values must be 0 or 1");
  }
}

VesselMask VesselMask::from_raster(const RasterImage& image) {
  std::vector<std::uint8_t> values(image.pixel_count());
  auto bytes = image.bytes();
  for (std::size_t p = 0; p < values.size(); ++p) {
    const auto r = bytes[3 * p], g = bytes[3 * p + 1], b = bytes[3 * p + 2];
    if (r != g || g != b || (r != 0 && r != 1 && r != 255)) {
      fail(ErrorCode::kMalformed, "mask is not binary at pixel " + std::to_string(p) +
                                      " (expected 0, 1 or 255 in every channel)");
    }
    values[p] = r != 0 ? 1 : 0;
  }
  return VesselMask(image.width(), image.height(), std::move(values));
}

RasterImage VesselMask::to_raster() const {
  RasterImage out(width_, height_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const std::uint8_t v = (*this)(x, y) ? 255 : 0;
      out.set(x, y, {v, v, v});
    }
  }
  return out;
}

std::size_t VesselMask::vessel_count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

std::uint8_t quantize(double value) noexcept {
  if (!(value > 0.0)) return 0;  // also maps NaN to 0
  if (value >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::floor(value + 0.5));
}

Hsi rgb_to_hsi(Rgb pixel) noexcept {
  const double r = pixel.r, g = pixel.g, b = pixel.b;
  const double sum = r + g + b;
  Hsi out;
  out.i = sum / 3.0;
  if (sum == 0.0) return out;
  const double lo = std::min({r, g, b});
  out.s = 1.0 - 3.0 * lo / sum;
  if (pixel.r == pixel.g && pixel.g == pixel.b) {
    out.s = 0.0;
    return out;
  }
  const double num = 0.5 * ((r - g) + (r - b));
  const double den = std::sqrt((r - g) * (r - g) + (r - b) * (g - b));
  const double theta = std::acos(std::clamp(num / den, -1.0, 1.0)) / kDegToRad;
  out.h = b > g ? 360.0 - theta : theta;
  if (out.h >= 360.0) out.h -= 360.0;
  return out;
}

Rgb hsi_to_rgb(const Hsi& pixel) noexcept {
  const double i = pixel.i, s = pixel.s;
  if (s <= 0.0) {
    const auto v = quantize(i);
    return {v, v, v};
  }
  double h = std::fmod(pixel.h, 360.0);
  if (h < 0.0) h += 360.0;
  const int sector = h < 120.0 ? 0 : (h < 240.0 ? 1 : 2);
  h -= 120.0 * sector;
  const double low = i * (1.0 - s);
  const double high = i * (1.0 + s * std::cos(h * kDegToRad) / std::cos((60.0 - h) * kDegToRad));
  const double rest = 3.0 * i - (low + high);
  double r, g, b;
  switch (sector) {
    case 0: b = low; r = high; g = rest; break;
    case 1: r = low; g = high; b = rest; break;
    default: g = low; b = high; r = rest; break;
  }
  return {quantize(r), quantize(g), quantize(b)};
}

HsiImage rgb_to_hsi(const RasterImage& image) {
  HsiImage out{Plane(image.width(), image.height()), Plane(image.width(), image.height()),
               Plane(image.width(), image.height())};
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Hsi p = rgb_to_hsi(image.at(x, y));
      out.hue(x, y) = p.h;
      out.saturation(x, y) = p.s;
      out.intensity(x, y) = p.i;
    }
  }
  return out;
}

RasterImage hsi_to_rgb(const HsiImage& image) {
  RasterImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.set(x, y, hsi_to_rgb(Hsi{image.hue(x, y), image.saturation(x, y), image.intensity(x, y)}));
    }
  }
  return out;
}

Plane to_grayscale(const RasterImage& image) {
  Plane out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb p = image.at(x, y);
      out(x, y) = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    }
  }
  return out;
}

RasterImage resize_bilinear(const RasterImage& image, int width, int height) {
  require_dimensions(width, height);
  if (width == image.width() && height == image.height()) return image;
  RasterImage out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = image.channel(x0, y0, c) * (1.0 - wx) + image.channel(x1, y0, c) * wx;
        const double bottom = image.channel(x0, y1, c) * (1.0 - wx) + image.channel(x1, y1, c) * wx;
        out.channel(x, y, c) = quantize(top * (1.0 - wy) + bottom * wy);
      }
    }
  }
  return out;
}

}  // namespace sve
