#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sve/dataset.hpp"
#include "sve/image.hpp"

namespace sve {

struct FeatureVector {
  std::vector<double> values;
  std::string descriptor;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureRow {
  std::string id;
  int label = 0;
  std::vector<double> values;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// Rows of (id, label, vector) sharing one descriptor and dimension.
struct FeatureTable {
  std::string descriptor;
  std::size_t dimension = 0;
  std::vector<FeatureRow> rows;

  /// Uniform dimension, finite values, unique ids, labels in 0..13.
  void validate() const;
  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

struct HogParams {
  int cell_size = 8;      // pixels
  int block_size = 2;     // cells
  int block_stride = 1;   // cells
  int bins = 9;
  bool signed_gradients = false;
  double clip = 0.2;

  void validate() const;
  std::string descriptor_id() const;
};

struct LbpParams {
  int radius = 1;
  int neighbors = 8;
  bool uniform = true;

  void validate() const;
  std::string descriptor_id() const;
};

/// Number of values hog() produces for a width x height input.
std::size_t hog_dimension(int width, int height, const HogParams& params);
std::size_t lbp_dimension(const LbpParams& params);

/// Histogram of oriented gradients. Gradients are central differences with
/// replicated borders. Bin b is centred on b * (range / bins) degrees and
/// votes are split linearly between the two nearest centres. Blocks are
/// L2-normalized, clipped and renormalized, then concatenated row-major.
FeatureVector hog(const Plane& gray, const HogParams& params);

/// Local binary pattern histogram over interior pixels. Neighbour k sits at
/// the integer offset nearest to radius * (cos, -sin)(2 pi k / P) and sets
/// bit k when its value is >= the centre. Uniform mode maps the
/// P(P-1)+2 uniform codes, in ascending code order, to their own bins and
/// everything else to a final catch-all bin. L1-normalized.
FeatureVector lbp(const Plane& gray, const LbpParams& params);

enum class DescriptorKind { kHog, kLbp };

struct DescriptorConfig {
  DescriptorKind kind = DescriptorKind::kLbp;
  HogParams hog;
  LbpParams lbp;
  /// Images are resized to size x size before extraction.
  int size = 224;

  std::string descriptor_id() const;
  std::size_t dimension() const;
};

FeatureVector extract(const RasterImage& image, const DescriptorConfig& config);

/// One row per manifest record, in manifest order.
FeatureTable extract_batch(const Manifest& manifest, const DescriptorConfig& config, unsigned jobs = 1);

// CSV with header `id,label,f0,...,f{n-1}`; values at 17 significant digits.
FeatureTable import_feature_table(const std::filesystem::path& path, const std::string& descriptor = "external");
void export_feature_table(const FeatureTable& table, const std::filesystem::path& path);
std::string feature_table_to_csv(const FeatureTable& table);
FeatureTable parse_feature_table(std::string_view text, const std::string& descriptor = "external");

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation; 0 = pass-through
};

StandardizationStats fit_standardization(const FeatureTable& train);
FeatureTable apply_standardization(const FeatureTable& table, const StandardizationStats& stats);

struct StandardizeResult {
  FeatureTable train;
  std::vector<FeatureTable> others;
  StandardizationStats stats;
};

/// z-scores every table with the training table's statistics. Constant
/// training columns pass through unchanged.
StandardizeResult standardize(const FeatureTable& train, const std::vector<FeatureTable>& others);

}  // namespace sve
