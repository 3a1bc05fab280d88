#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sve/random.hpp"

namespace sve {

/// Labels 0..13 of the STARE disease taxonomy.
inline constexpr int kClassCount = 14;

const std::array<std::string, kClassCount>& stare_class_names();

enum class Split { kTrain, kVal, kTest, kUnassigned };

std::string_view to_string(Split split);
/// Throws Error{kMalformed} for anything but train/val/test/unassigned.
Split parse_split(std::string_view text);

/// Where a sample came from. Serialized as `original` or
/// `augmented:<src>[+<src>]:<op>[;<op>...]:<seed>`.
struct Provenance {
  bool augmented = false;
  std::vector<std::string> sources;
  std::vector<std::string> ops;
  std::uint64_t seed = 0;

  std::string to_string() const;
  static Provenance parse(std::string_view text);

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SampleRecord {
  std::string id;
  std::filesystem::path image;
  std::optional<std::filesystem::path> mask;
  int label = 0;
  Split split = Split::kUnassigned;
  Provenance provenance;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Manifest {
  std::string name;
  std::vector<SampleRecord> records;
  std::array<std::string, kClassCount> class_names = stare_class_names();

  /// Unique ids, labels in range, augmented rows carry sources.
  void validate() const;
  const SampleRecord* find(std::string_view id) const;
};

/// Ids are restricted to [A-Za-z0-9._-] so they are safe as file stems and
/// inside provenance strings.
bool is_valid_sample_id(std::string_view id);

struct ManifestLoadOptions {
  /// Verify image/mask files exist and that mask dimensions match the image.
  bool check_files = false;
};

// CSV with header `id,image,mask,label,split,provenance`. Relative paths are
// resolved against the manifest's directory on load and written relative to
// the destination directory on save.
Manifest load_manifest(const std::filesystem::path& path, const ManifestLoadOptions& options = {});
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
std::string manifest_to_csv(const Manifest& manifest, const std::filesystem::path& base_dir);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// Per-class stratified split of the original (non-augmented) records.
/// Each class is shuffled with a seed derived from (seed, label) and cut
/// into contiguous runs whose sizes come from largest-remainder rounding,
/// ties going to the earlier split. A class with >= 3 samples always
/// contributes at least one training sample.
Manifest stratified_split(const Manifest& manifest, const SplitRatios& ratios, RngSeed seed);

/// Split sizes for one class of `count` samples.
std::array<std::size_t, 3> split_sizes(std::size_t count, const SplitRatios& ratios);

struct Distribution {
  std::map<Split, std::array<std::size_t, kClassCount>> counts;

  std::size_t total() const;
  std::size_t count(Split split, int label) const;
};

/// Per-split per-class counts. Throws Error{kInvalidArgument} if any record
/// is still unassigned.
Distribution summarize_distribution(const Manifest& manifest);

struct ManifestInitResult {
  Manifest manifest;
  std::size_t skipped = 0;  // label-file rows with a label outside 0..13
  std::vector<std::string> warnings;
};

/// Builds a manifest from a directory of images plus a label list file.
/// Each non-comment line of the label file is `<stem> <label>` (separated by
/// whitespace, comma or tab); extra columns are ignored. When `masks_dir` is
/// given, a mask with the same stem is attached if present.
ManifestInitResult manifest_init(const std::filesystem::path& images_dir,
                                 const std::filesystem::path& labels_file,
                                 const std::optional<std::filesystem::path>& masks_dir = std::nullopt);

}  // namespace sve
