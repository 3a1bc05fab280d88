#pragma once

#include <filesystem>

#include "sve/image.hpp"

namespace sve {

// Supported formats: 8-bit PNG (gray, RGB or palette; expanded to RGB) and
// binary PPM (P6, maxval 255). Format is detected from the file signature
// on load and from the extension (.png / .ppm) on save.
//
// Errors: kNotFound for a missing file, kMalformed for a bad or truncated
// header/payload, kUnsupported for 16-bit data, alpha channels or an
// unknown extension.
RasterImage load_raster(const std::filesystem::path& path);
void save_raster(const RasterImage& image, const std::filesystem::path& path);

VesselMask load_mask(const std::filesystem::path& path);

}  // namespace sve
