#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sve {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Hue in degrees [0,360), saturation in [0,1], intensity on the 0-255 scale.
struct Hsi {
  double h = 0.0;
  double s = 0.0;
  double i = 0.0;
};

/// Interleaved 8-bit RGB raster, row-major.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  Rgb at(int x, int y) const noexcept {
    const auto* p = &bytes_[offset(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb value) noexcept {
    auto* p = &bytes_[offset(x, y)];
    p[0] = value.r;
    p[1] = value.g;
    p[2] = value.b;
  }
  std::uint8_t channel(int x, int y, int c) const noexcept { return bytes_[offset(x, y) + c]; }
  std::uint8_t& channel(int x, int y, int c) noexcept { return bytes_[offset(x, y) + c]; }

  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
  std::span<std::uint8_t> bytes() noexcept { return bytes_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Real-valued H x W matrix, row-major.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  double operator()(int x, int y) const noexcept { return values_[index(x, y)]; }
  double& operator()(int x, int y) noexcept { return values_[index(x, y)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct HsiImage {
  Plane hue;
  Plane saturation;
  Plane intensity;

  int width() const noexcept { return intensity.width(); }
  int height() const noexcept { return intensity.height(); }
};

/// Binary vessel mask; every value is 0 or 1.
class VesselMask {
 public:
  VesselMask() = default;
  VesselMask(int width, int height, std::uint8_t fill = 0);
  /// Throws Error{kMalformed} if any value is not 0 or 1.
  VesselMask(int width, int height, std::vector<std::uint8_t> values);

  /// Builds a mask from a raster whose channels are all 0 (background) or
  /// all 1/255 (vessel). Any other pixel is rejected as non-binary.
  static VesselMask from_raster(const RasterImage& image);
  RasterImage to_raster() const;

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t operator()(int x, int y) const noexcept {
    return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }
  void set(int x, int y, bool vessel) noexcept {
    values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)] = vessel ? 1 : 0;
  }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  std::size_t vessel_count() const noexcept;

  friend bool operator==(const VesselMask&, const VesselMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> values_;
};

Hsi rgb_to_hsi(Rgb pixel) noexcept;
/// Inverse of rgb_to_hsi; channels are clamped to [0,255] and rounded half-up.
Rgb hsi_to_rgb(const Hsi& pixel) noexcept;

HsiImage rgb_to_hsi(const RasterImage& image);
RasterImage hsi_to_rgb(const HsiImage& image);

/// Luminance 0.299 R + 0.587 G + 0.114 B.
Plane to_grayscale(const RasterImage& image);

/// Bilinear resampling with pixel-centre alignment.
RasterImage resize_bilinear(const RasterImage& image, int width, int height);

/// Round half-up and clamp into [0,255].
std::uint8_t quantize(double value) noexcept;

}  // namespace sve
