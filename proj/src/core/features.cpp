#include "sve/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "sve/csv.hpp"
#include "sve/error.hpp"
#include "sve/parallel.hpp"
#include "sve/raster_io.hpp"

namespace sve {

namespace {

constexpr double kNormEpsilonSq = 1e-12;

void normalize_l2(std::span<double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double n = std::sqrt(ss + kNormEpsilonSq);
  for (double& x : v) x /= n;
}

struct LbpOffset {
  int dx;
  int dy;
};

std::vector<LbpOffset> lbp_offsets(const LbpParams& p) {
  std::vector<LbpOffset> offsets;
  for (int k = 0; k < p.neighbors; ++k) {
    const double a = 2.0 * std::numbers::pi * k / p.neighbors;
    offsets.push_back({static_cast<int>(std::lround(p.radius * std::cos(a))),
                       static_cast<int>(std::lround(-p.radius * std::sin(a)))});
  }
  return offsets;
}

int circular_transitions(unsigned code, int bits) {
  int t = 0;
  for (int k = 0; k < bits; ++k) {
    const unsigned a = (code >> k) & 1u;
    const unsigned b = (code >> ((k + 1) % bits)) & 1u;
    t += a != b;
  }
  return t;
}

// Maps each code to its histogram bin.
std::vector<std::uint32_t> lbp_bin_map(const LbpParams& p) {
  const std::size_t codes = std::size_t{1} << p.neighbors;
  std::vector<std::uint32_t> map(codes);
  if (!p.uniform) {
    for (std::size_t c = 0; c < codes; ++c) map[c] = static_cast<std::uint32_t>(c);
    return map;
  }
  const auto catch_all = static_cast<std::uint32_t>(p.neighbors * (p.neighbors - 1) + 2);
  std::uint32_t next = 0;
  for (std::size_t c = 0; c < codes; ++c) {
    map[c] = circular_transitions(static_cast<unsigned>(c), p.neighbors) <= 2 ? next++ : catch_all;
  }
  return map;
}

}  // namespace

void FeatureTable::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& r : rows) {
    if (r.values.size() != dimension) {
      fail(ErrorCode::kDimensionMismatch, "row '" + r.id + "' has " + std::to_string(r.values.size()) +
                                              " features, table dimension is " + std::to_string(dimension));
    }
    if (r.label < 0 || r.label >= kClassCount) {
      fail(ErrorCode::kOutOfRange, "row '" + r.id + "' has label " + std::to_string(r.label) + " outside 0..13");
    }
    if (!ids.insert(r.id).second) fail(ErrorCode::kDuplicateId, "duplicate feature row id '" + r.id + "'");
    for (double v : r.values) {
      if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "row '" + r.id + "' contains a non-finite value");
    }
  }
}

void HogParams::validate() const {
  if (cell_size < 1 || block_size < 1 || block_stride < 1 || bins < 1 || !(clip > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "HOG parameters must all be positive");
  }
  if (block_stride > block_size) fail(ErrorCode::kInvalidArgument, "HOG block stride must not exceed block size");
}

std::string HogParams::descriptor_id() const {
  std::ostringstream s;
  s << "hog(cell=" << cell_size << ",block=" << block_size << ",stride=" << block_stride << ",bins=" << bins
    << ",signed=" << (signed_gradients ? 1 : 0) << ",clip=" << csv::format_double(clip) << ")";
  return s.str();
}

void LbpParams::validate() const {
  if (radius < 1) fail(ErrorCode::kInvalidArgument, "LBP radius must be >= 1");
  if (neighbors < 3 || neighbors > 16) fail(ErrorCode::kInvalidArgument, "LBP neighbor count must be in [3, 16]");
}

std::string LbpParams::descriptor_id() const {
  return "lbp(radius=" + std::to_string(radius) + ",neighbors=" + std::to_string(neighbors) +
         ",uniform=" + (uniform ? "1" : "0") + ")";
}

std::size_t hog_dimension(int width, int height, const HogParams& p) {
  p.validate();
  const int cells_x = width / p.cell_size, cells_y = height / p.cell_size;
  if (cells_x < p.block_size || cells_y < p.block_size) return 0;
  const std::size_t blocks_x = static_cast<std::size_t>((cells_x - p.block_size) / p.block_stride + 1);
  const std::size_t blocks_y = static_cast<std::size_t>((cells_y - p.block_size) / p.block_stride + 1);
  return blocks_x * blocks_y * static_cast<std::size_t>(p.block_size * p.block_size * p.bins);
}

std::size_t lbp_dimension(const LbpParams& p) {
  p.validate();
  return p.uniform ? static_cast<std::size_t>(p.neighbors * (p.neighbors - 1) + 3)
                   : std::size_t{1} << p.neighbors;
}

FeatureVector hog(const Plane& gray, const HogParams& p) {
  p.validate();
  const int w = gray.width(), h = gray.height();
  const int cells_x = w / p.cell_size, cells_y = h / p.cell_size;
  if (cells_x < p.block_size || cells_y < p.block_size) {
    fail(ErrorCode::kInvalidArgument, "image " + std::to_string(w) + "x" + std::to_string(h) +
                                          " is smaller than one HOG block");
  }
  const double range = p.signed_gradients ? 360.0 : 180.0;
  const double bin_width = range / p.bins;
  std::vector<double> cells(static_cast<std::size_t>(cells_x * cells_y * p.bins), 0.0);
  for (int y = 0; y < cells_y * p.cell_size; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    for (int x = 0; x < cells_x * p.cell_size; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const double gx = gray(xp, y) - gray(xm, y);
      const double gy = gray(x, yp) - gray(x, ym);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0) angle += 360.0;
      angle = std::fmod(angle, range);
      const double pos = angle / bin_width;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const int b0 = static_cast<int>(lower) % p.bins;
      const int b1 = (b0 + 1) % p.bins;
      double* hist = &cells[static_cast<std::size_t>(((y / p.cell_size) * cells_x + x / p.cell_size) * p.bins)];
      hist[b0] += (1.0 - frac) * mag;
      hist[b1] += frac * mag;
    }
  }
  FeatureVector out;
  out.descriptor = p.descriptor_id();
  out.values.reserve(hog_dimension(w, h, p));
  const std::size_t block_len = static_cast<std::size_t>(p.block_size * p.block_size * p.bins);
  std::vector<double> block(block_len);
  for (int by = 0; by + p.block_size <= cells_y; by += p.block_stride) {
    for (int bx = 0; bx + p.block_size <= cells_x; bx += p.block_stride) {
      std::size_t k = 0;
      for (int cy = by; cy < by + p.block_size; ++cy)
        for (int cx = bx; cx < bx + p.block_size; ++cx)
          for (int b = 0; b < p.bins; ++b) block[k++] = cells[static_cast<std::size_t>((cy * cells_x + cx) * p.bins + b)];
      normalize_l2(block);
      for (double& v : block) v = std::min(v, p.clip);
      normalize_l2(block);
      out.values.insert(out.values.end(), block.begin(), block.end());
    }
  }
  return out;
}

FeatureVector lbp(const Plane& gray, const LbpParams& p) {
  p.validate();
  const int w = gray.width(), h = gray.height();
  if (w <= 2 * p.radius || h <= 2 * p.radius) {
    fail(ErrorCode::kInvalidArgument, "image " + std::to_string(w) + "x" + std::to_string(h) +
                                          " is too small for LBP radius " + std::to_string(p.radius));
  }
  const auto offsets = lbp_offsets(p);
  const auto bins = lbp_bin_map(p);
  std::vector<double> hist(lbp_dimension(p), 0.0);
  std::size_t count = 0;
  for (int y = p.radius; y < h - p.radius; ++y) {
    for (int x = p.radius; x < w - p.radius; ++x) {
      const double centre = gray(x, y);
      unsigned code = 0;
      for (int k = 0; k < p.neighbors; ++k) {
        if (gray(x + offsets[k].dx, y + offsets[k].dy) >= centre) code |= 1u << k;
      }
      hist[bins[code]] += 1.0;
      ++count;
    }
  }
  for (double& v : hist) v /= static_cast<double>(count);
  return {std::move(hist), p.descriptor_id()};
}

std::string DescriptorConfig::descriptor_id() const {
  return (kind == DescriptorKind::kHog ? hog.descriptor_id() : lbp.descriptor_id()) + "@" + std::to_string(size);
}

std::size_t DescriptorConfig::dimension() const {
  return kind == DescriptorKind::kHog ? hog_dimension(size, size, hog) : lbp_dimension(lbp);
}

FeatureVector extract(const RasterImage& image, const DescriptorConfig& config) {
  if (config.size < 1) fail(ErrorCode::kInvalidArgument, "descriptor raster size must be positive");
  const Plane gray = to_grayscale(resize_bilinear(image, config.size, config.size));
  FeatureVector v = config.kind == DescriptorKind::kHog ? hog(gray, config.hog) : lbp(gray, config.lbp);
  v.descriptor = config.descriptor_id();
  return v;
}

FeatureTable extract_batch(const Manifest& manifest, const DescriptorConfig& config, unsigned jobs) {
  FeatureTable table;
  table.descriptor = config.descriptor_id();
  table.dimension = config.dimension();
  if (table.dimension == 0) fail(ErrorCode::kInvalidArgument, "descriptor produces no features at this raster size");
  table.rows.resize(manifest.records.size());
  parallel_for(manifest.records.size(), jobs, [&](std::size_t i) {
    const auto& r = manifest.records[i];
    auto v = extract(load_raster(r.image), config);
    if (v.size() != table.dimension) {
      fail(ErrorCode::kDimensionMismatch, "sample '" + r.id + "' produced " + std::to_string(v.size()) + " features");
    }
    table.rows[i] = {r.id, r.label, std::move(v.values)};
  });
  table.validate();
  return table;
}

std::string feature_table_to_csv(const FeatureTable& table) {
  table.validate();
  std::ostringstream out;
  out << "id,label";
  for (std::size_t j = 0; j < table.dimension; ++j) out << ",f" << j;
  out << '\n';
  for (const auto& r : table.rows) {
    csv::Row fields{r.id, std::to_string(r.label)};
    for (double v : r.values) fields.push_back(csv::format_double(v));
    csv::write_row(out, fields);
  }
  return out.str();
}

void export_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  csv::write_text(path, feature_table_to_csv(table));
}

FeatureTable parse_feature_table(std::string_view text, const std::string& descriptor) {
  const auto rows = csv::parse(text);
  if (rows.empty()) fail(ErrorCode::kMalformed, "feature table has no header");
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    fail(ErrorCode::kMalformed, "feature table header must start with id,label");
  }
  for (std::size_t j = 2; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j - 2)) {
      fail(ErrorCode::kMalformed, "feature table column " + std::to_string(j) + " must be named f" + std::to_string(j - 2));
    }
  }
  FeatureTable table;
  table.descriptor = descriptor;
  table.dimension = header.size() - 2;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    const std::string where = "feature table line " + std::to_string(i + 1);
    if (row.size() != header.size()) {
      fail(ErrorCode::kMalformed, where + ": ragged row with " + std::to_string(row.size()) + " cells");
    }
    FeatureRow r;
    r.id = row[0];
    if (r.id.empty()) fail(ErrorCode::kMalformed, where + ": empty id");
    if (!ids.insert(r.id).second) fail(ErrorCode::kDuplicateId, where + ": duplicate id '" + r.id + "'");
    const auto label = csv::parse_int(row[1]);
    if (!label) fail(ErrorCode::kMalformed, where + ": bad label '" + row[1] + "'");
    if (*label < 0 || *label >= kClassCount) {
      fail(ErrorCode::kOutOfRange, where + ": label " + std::to_string(*label) + " outside 0..13");
    }
    r.label = static_cast<int>(*label);
    r.values.reserve(table.dimension);
    for (std::size_t j = 2; j < row.size(); ++j) {
      const auto v = csv::parse_double(row[j]);
      if (!v) {
        fail(ErrorCode::kMalformed, where + ": cannot parse '" + row[j] + "'");
      }
      if (!std::isfinite(*v)) fail(ErrorCode::kNonFinite, where + ": non-finite value '" + row[j] + "'");
      r.values.push_back(*v);
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

FeatureTable import_feature_table(const std::filesystem::path& path, const std::string& descriptor) {
  return parse_feature_table(csv::read_text(path), descriptor);
}

StandardizationStats fit_standardization(const FeatureTable& train) {
  StandardizationStats stats;
  stats.mean.assign(train.dimension, 0.0);
  stats.stddev.assign(train.dimension, 0.0);
  if (train.rows.empty()) return stats;
  const double n = static_cast<double>(train.rows.size());
  for (const auto& r : train.rows)
    for (std::size_t j = 0; j < train.dimension; ++j) stats.mean[j] += r.values[j];
  for (double& m : stats.mean) m /= n;
  for (const auto& r : train.rows) {
    for (std::size_t j = 0; j < train.dimension; ++j) {
      const double d = r.values[j] - stats.mean[j];
      stats.stddev[j] += d * d;
    }
  }
  for (double& s : stats.stddev) s = std::sqrt(s / n);
  return stats;
}

FeatureTable apply_standardization(const FeatureTable& table, const StandardizationStats& stats) {
  if (table.dimension != stats.mean.size()) {
    fail(ErrorCode::kDimensionMismatch, "table dimension " + std::to_string(table.dimension) +
                                            " does not match standardization stats (" +
                                            std::to_string(stats.mean.size()) + ")");
  }
  FeatureTable out = table;
  for (auto& r : out.rows) {
    for (std::size_t j = 0; j < out.dimension; ++j) {
      if (stats.stddev[j] > 0.0) r.values[j] = (r.values[j] - stats.mean[j]) / stats.stddev[j];
    }
  }
  return out;
}

StandardizeResult standardize(const FeatureTable& train, const std::vector<FeatureTable>& others) {
  for (const auto& t : others) {
    if (t.dimension != train.dimension) {
      fail(ErrorCode::kDimensionMismatch, "cannot standardize tables of dimension " + std::to_string(t.dimension) +
                                              " against training dimension " + std::to_string(train.dimension));
    }
    if (t.descriptor != train.descriptor) {
      fail(ErrorCode::kDimensionMismatch, "descriptor '" + t.descriptor + "' differs from training descriptor '" +
                                              train.descriptor + "'");
    }
  }
  StandardizeResult result;
  result.stats = fit_standardization(train);
  result.train = apply_standardization(train, result.stats);
  for (const auto& t : others) result.others.push_back(apply_standardization(t, result.stats));
  return result;
}

}  // namespace sve
