#include "sve/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sve/csv.hpp"
#include "sve/error.hpp"

namespace sve {

namespace {

namespace fs = std::filesystem;

constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

RasterImage decode_png(const std::string& bytes, const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    const std::string why = png.message;
    png_image_free(&png);
    fail(ErrorCode::kMalformed, "malformed PNG header in " + path.string() + ": " + why);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    fail(ErrorCode::kUnsupported, "unsupported bit depth (16-bit) in " + path.string());
  }
  if (png.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&png);
    fail(ErrorCode::kUnsupported, "alpha channels are not supported: " + path.string());
  }
  if (png.width < 1 || png.height < 1 || png.width > 1u << 15 || png.height > 1u << 15) {
    png_image_free(&png);
    fail(ErrorCode::kMalformed, "implausible PNG dimensions in " + path.string());
  }
  png.format = PNG_FORMAT_RGB;
  RasterImage image(static_cast<int>(png.width), static_cast<int>(png.height));
  auto out = image.bytes();
  if (!png_image_finish_read(&png, nullptr, out.data(), 0, nullptr)) {
    const std::string why = png.message;
    png_image_free(&png);
    fail(ErrorCode::kMalformed, "truncated or corrupt PNG data in " + path.string() + ": " + why);
  }
  return image;
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_pnm_token(const std::string& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    token.push_back(bytes[pos++]);
  }
  return token;
}

RasterImage decode_ppm(const std::string& bytes, const fs::path& path) {
  std::size_t pos = 2;
  auto header_int = [&](const char* what) {
    const auto token = next_pnm_token(bytes, pos);
    const auto value = csv::parse_int(token);
    if (!value || *value < 0) {
      fail(ErrorCode::kMalformed, std::string("malformed PPM header (") + what + ") in " + path.string());
    }
    return *value;
  };
  const auto width = header_int("width");
  const auto height = header_int("height");
  const auto maxval = header_int("maxval");
  if (width < 1 || height < 1 || width > 1 << 15 || height > 1 << 15) {
    fail(ErrorCode::kMalformed, "implausible PPM dimensions in " + path.string());
  }
  if (maxval > 255) fail(ErrorCode::kUnsupported, "unsupported bit depth (maxval > 255) in " + path.string());
  if (maxval != 255) fail(ErrorCode::kUnsupported, "only maxval 255 is supported: " + path.string());
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(ErrorCode::kMalformed, "malformed PPM header terminator in " + path.string());
  }
  ++pos;
  RasterImage image(static_cast<int>(width), static_cast<int>(height));
  auto out = image.bytes();
  if (bytes.size() - pos < out.size()) {
    fail(ErrorCode::kMalformed, "truncated PPM payload in " + path.string());
  }
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), out.size(), out.begin());
  return image;
}

std::string lower_extension(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

RasterImage load_raster(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCode::kNotFound, "image not found: " + path.string());
  const std::string bytes = csv::read_text(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes, path);
  fail(ErrorCode::kMalformed, "unrecognized image header in " + path.string());
}

void save_raster(const RasterImage& image, const fs::path& path) {
  if (image.empty()) fail(ErrorCode::kInvalidArgument, "cannot save an empty image");
  const auto ext = lower_extension(path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (ext == ".ppm") {
    std::string out = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    const auto bytes = image.bytes();
    out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    csv::write_text(path, out);
    return;
  }
  if (ext != ".png") fail(ErrorCode::kUnsupported, "unsupported output extension: " + path.string());

  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  const auto bytes = image.bytes();
  if (!png_image_write_get_memory_size(png, size, 0, bytes.data(), 0, nullptr)) {
    fail(ErrorCode::kIo, std::string("PNG encoding failed: ") + png.message);
  }
  std::string buffer(size, '\0');
  if (!png_image_write_to_memory(&png, buffer.data(), &size, 0, bytes.data(), 0, nullptr)) {
    fail(ErrorCode::kIo, std::string("PNG encoding failed: ") + png.message);
  }
  buffer.resize(size);
  csv::write_text(path, buffer);
}

VesselMask load_mask(const fs::path& path) {
  return VesselMask::from_raster(load_raster(path));
}

}  // namespace sve
