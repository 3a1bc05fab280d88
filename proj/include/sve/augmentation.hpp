#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sve/dataset.hpp"
#include "sve/image.hpp"
#include "sve/random.hpp"

namespace sve {

enum class MirrorAxis { kHorizontal, kVertical };

/// Rotation about the image centre with bilinear sampling; samples that fall
/// outside the source frame are black. Output keeps the input dimensions.
RasterImage rotate(const RasterImage& image, double degrees);

/// Exact pixel permutation.
RasterImage mirror(const RasterImage& image, MirrorAxis axis);

/// Adds an independent N(mean, stddev) draw to every channel of every pixel,
/// then rounds and clamps. Throws Error{kInvalidArgument} for stddev < 0.
RasterImage add_gaussian_noise(const RasterImage& image, double mean, double stddev, RngSeed seed);

struct PixelBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

inline constexpr double kCutmixMinFraction = 0.1;
inline constexpr double kCutmixMaxFraction = 0.4;

/// Draws a paste rectangle whose area is a fraction in [0.1, 0.4] of the
/// image, at a uniform position. Throws if no such rectangle exists.
PixelBox sample_cutmix_box(int width, int height, Rng& rng);

/// Pastes a rectangle of `b` into `a`. Both images must share a class label
/// (kClassMismatch otherwise) and dimensions (kDimensionMismatch).
RasterImage cutmix_same_class(const RasterImage& a, const RasterImage& b, int label_a, int label_b,
                              RngSeed seed, PixelBox* box = nullptr);

/// Contiguous crop_w x crop_h window at a seeded uniform position.
RasterImage random_crop(const RasterImage& image, int crop_height, int crop_width, RngSeed seed,
                        PixelBox* box = nullptr);

/// Crops `ratio` of each dimension at a random position and resizes back.
RasterImage random_crop_resize(const RasterImage& image, double ratio, RngSeed seed);

enum class AugOpKind { kRotate, kMirror, kNoise, kCutmix, kCrop };

/// One step of a derived sample's recipe. Text form: rotate(15),
/// mirror(horizontal), noise(0,10), cutmix(<partner id>), crop(0.9).
struct AugOp {
  AugOpKind kind = AugOpKind::kRotate;
  double angle = 0.0;
  MirrorAxis axis = MirrorAxis::kHorizontal;
  double noise_mean = 0.0;
  double noise_std = 10.0;
  std::string partner;
  double crop_ratio = 0.9;

  std::string to_string() const;
  static AugOp parse(std::string_view text);

  friend bool operator==(const AugOp&, const AugOp&) = default;
};

struct PlannedSample {
  std::string source_id;
  std::string derived_id;
  std::vector<AugOp> ops;
  RngSeed seed;

  friend bool operator==(const PlannedSample&, const PlannedSample&) = default;
};

struct AugmentationPlan {
  RngSeed seed;
  std::size_t target = 0;
  std::map<int, std::vector<PlannedSample>> per_class;

  std::size_t size() const;
  std::string to_json() const;
  static AugmentationPlan from_json(std::string_view text);

  friend bool operator==(const AugmentationPlan&, const AugmentationPlan&) = default;
};

/// ±5, ±10, ±15, ±30, ±45, 90, 180, 270 degrees.
const std::vector<double>& default_rotation_angles();

struct BalanceOptions {
  std::size_t target = 0;
  std::vector<double> angles = default_rotation_angles();
  double noise_mean = 0.0;
  double noise_std = 10.0;
  /// Permit target below the largest class; such classes get no entries.
  bool allow_undershoot = false;
  /// Append crop(crop_ratio) to every derived sample.
  bool random_crop = false;
  double crop_ratio = 0.9;
};

/// Largest class count rounded up to a multiple of 10.
std::size_t default_balance_target(const std::map<int, std::vector<std::string>>& class_members);

/// Schedules derived samples until each class reaches the target. Candidates
/// are taken in priority order: every (angle, source) rotation, then
/// horizontal and vertical mirrors, then noise, then same-class cutmix pairs,
/// then further noise rounds. Sources are visited in a seeded order.
AugmentationPlan build_balance_plan(const std::map<int, std::vector<std::string>>& class_members,
                                    const BalanceOptions& options, RngSeed seed);

struct ExecuteOptions {
  std::filesystem::path out_dir;
  std::set<Split> eligible_splits = {Split::kTrain};
  unsigned jobs = 1;
};

/// Renders a plan: one PNG per derived sample (`<derived id>.png`) and one
/// appended manifest row carrying provenance. Sources must exist
/// (kNotFound) and lie in an eligible split (kInvalidArgument).
Manifest execute_plan(const AugmentationPlan& plan, const Manifest& manifest, const ExecuteOptions& options);

/// Class members of the given splits, in manifest order.
std::map<int, std::vector<std::string>> class_members(const Manifest& manifest, const std::set<Split>& splits);

}  // namespace sve
