#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sve/augmentation.hpp"
#include "sve/classifiers.hpp"
#include "sve/dataset.hpp"
#include "sve/enhancement.hpp"
#include "sve/error.hpp"
#include "sve/features.hpp"

namespace sve {

inline constexpr std::string_view kVersion = "1.0.0";

/// Every knob of every stage, as one flat JSON object. Unknown keys and
/// wrongly typed values are rejected with kInvalidArgument.
struct RunConfig {
  std::string work_dir = "sve_run";
  std::string manifest;
  std::uint64_t seed = 0;
  // Stage seeds default to values derived from `seed`.
  std::optional<std::uint64_t> split_seed;
  std::optional<std::uint64_t> augment_seed;
  std::optional<std::uint64_t> model_seed;
  unsigned jobs = 1;  // 0 = all hardware threads
  bool check_files = false;

  double split_train = 0.6;
  double split_val = 0.2;
  double split_test = 0.2;

  std::string strategy = "weighted-background";
  double weight = 0.2;
  double gamma = 0.5;

  bool augment = true;
  std::uint64_t augment_target = 0;  // 0 = largest class rounded up to a multiple of 10
  std::vector<double> augment_angles = default_rotation_angles();
  std::vector<std::string> augment_splits = {"train"};
  double noise_mean = 0.0;
  double noise_std = 10.0;
  bool random_crop = false;
  double crop_ratio = 0.9;

  std::string descriptor = "lbp";
  int image_size = 224;
  int lbp_radius = 1;
  int lbp_neighbors = 8;
  bool lbp_uniform = true;
  int hog_cell = 8;
  int hog_block = 2;
  int hog_stride = 1;
  int hog_bins = 9;
  bool hog_signed = false;
  bool standardize = false;

  std::string classifier = "knn";
  int k = 5;
  int hidden_units = 256;
  double learning_rate = 0.01;
  int epochs = 500;
  int batch_size = 0;
  double l2 = 1e-4;
  double mlp_l2 = 0.0;
  double ridge = 1e-6;
  bool zero_init = false;

  /// Keys set explicitly by a config file or flag, for unused-knob warnings.
  std::set<std::string> explicit_keys;

  /// Merges a JSON object over the current values.
  void apply_json(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
  void validate() const;
  /// All keys, sorted, without `explicit_keys`.
  std::string to_json() const;
  std::vector<std::string> warnings() const;

  SveStrategy sve_strategy() const;
  SplitRatios split_ratios() const;
  BalanceOptions balance_options() const;
  std::set<Split> augment_split_set() const;
  DescriptorConfig descriptor_config() const;
  ClassifierSpec classifier_spec() const;
  RngSeed stage_seed(std::string_view stage) const;
  unsigned worker_count() const;
};

struct StageOptions {
  // Stage inputs/outputs; empty means the default location under work_dir.
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path model;
  // manifest init
  std::filesystem::path images;
  std::filesystem::path labels;
  std::filesystem::path masks;
  bool dry_run = false;
  /// Skip pipeline stages whose log shows identical inputs and intact outputs.
  bool resume = false;
};

struct StageOutcome {
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> warnings;
  std::vector<std::string> plan;     // dry-run stage plan
  std::vector<std::string> skipped;  // stages reused by resume
  std::vector<std::filesystem::path> logs;

  std::string to_json() const;
};

/// Stage names: manifest-init, split, enhance, augment, features,
/// features-import, train, predict, evaluate, pipeline.
const std::vector<std::string>& stage_names();

/// Runs one stage (or the whole pipeline). Each executed stage writes
/// `<work_dir>/logs/<stage>.json` with hashed inputs and outputs.
StageOutcome run_stage(std::string_view stage, const RunConfig& config, const StageOptions& options);

/// 0 ok, 2 usage, 3 input, 4 numeric/degenerate, 1 anything else.
int exit_code_for(ErrorCode code);

}  // namespace sve
