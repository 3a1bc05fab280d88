#include <gtest/gtest.h>

#include "json.hpp"
#include "sve/csv.hpp"
#include "sve/error.hpp"
#include "sve/hashing.hpp"
#include "sve/pipeline.hpp"
#include "test_support.hpp"

using namespace sve;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

bool has_warning(const std::vector<std::string>& w, const std::string& needle) {
  return std::any_of(w.begin(), w.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

RunConfig small_config(const fs::path& work, const fs::path& manifest) {
  RunConfig c;
  c.apply_json(json{{"work_dir", work.string()},
                    {"manifest", manifest.string()},
                    {"seed", 3},
                    {"image_size", 32},
                    {"k", 3}}
                   .dump());
  return c;
}

}  // namespace

TEST(RunConfig, DefaultsAndOverrides) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(c.warnings().empty());
  const auto doc = json::parse(c.to_json());
  EXPECT_EQ(doc["strategy"], "weighted-background");
  EXPECT_EQ(doc["weight"], 0.2);
  EXPECT_EQ(doc["image_size"], 224);
  EXPECT_TRUE(doc["split_seed"].is_null());
  c.apply_json(R"({"classifier": "mlp", "epochs": 7, "split_seed": 99, "augment_angles": [5, -5]})");
  EXPECT_EQ(c.classifier, "mlp");
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.stage_seed("split"), RngSeed{99});
  EXPECT_EQ(c.stage_seed("augment"), derive_seed(RngSeed{0}, "augment"));
  EXPECT_EQ(c.classifier_spec().seed, derive_seed(RngSeed{0}, "train").value);
  EXPECT_EQ(c.augment_angles, (std::vector<double>{5, -5}));
  EXPECT_EQ(c.explicit_keys.count("epochs"), 1u);
  RunConfig again;
  again.apply_json(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(RunConfig, RejectsUnknownKeysAndWrongTypes) {
  RunConfig c;
  for (const char* bad : {R"({"colour": 1})", R"({"k": "five"})", R"({"k": 2.5})", R"({"seed": -1})",
                          R"({"augment": 1})", R"([1])", "{", R"({"split_seed": "x"})"}) {
    EXPECT_EQ(code_of([&] { c.apply_json(bad); }), ErrorCode::kInvalidArgument) << bad;
  }
  EXPECT_NO_THROW(c.apply_json(R"({"weight": 1})"));  // an integer is fine for a float knob
}

TEST(RunConfig, ValidateCatchesBadValues) {
  for (const char* bad : {R"({"split_train": 0.7})", R"({"strategy": "sharpen"})", R"({"descriptor": "sift"})",
                          R"({"classifier": "svm"})", R"({"k": 0})", R"({"weight": -0.5})",
                          R"({"augment_splits": ["holdout"]})", R"({"crop_ratio": 0})", R"({"image_size": 4})",
                          R"({"descriptor": "hog", "image_size": 8})", R"({"noise_std": -1})"}) {
    RunConfig c;
    c.apply_json(bad);
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument) << bad;
  }
}

TEST(RunConfig, UnusedKnobWarnings) {
  RunConfig c;
  c.apply_json(R"({"strategy": "vessel-only", "weight": 0.3, "hog_bins": 12, "hidden_units": 4})");
  const auto w = c.warnings();
  EXPECT_TRUE(has_warning(w, "weight is unused"));
  EXPECT_TRUE(has_warning(w, "hog_bins"));
  EXPECT_TRUE(has_warning(w, "hidden_units"));
  EXPECT_EQ(w.size(), 3u);
  RunConfig d;
  d.apply_json(R"({"augment": false, "augment_target": 30})");
  EXPECT_TRUE(has_warning(d.warnings(), "augment_target"));
}

TEST(RunConfig, Workers) {
  RunConfig c;
  c.jobs = 3;
  EXPECT_EQ(c.worker_count(), 3u);
  c.jobs = 0;
  EXPECT_GE(c.worker_count(), 1u);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorCode::kOk), 0);
  EXPECT_EQ(exit_code_for(ErrorCode::kInvalidArgument), 2);
  for (auto c : {ErrorCode::kNotFound, ErrorCode::kMalformed, ErrorCode::kDimensionMismatch, ErrorCode::kVersionMismatch,
                 ErrorCode::kIo})
    EXPECT_EQ(exit_code_for(c), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::kNonFinite), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::kDegenerate), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::kInternal), 1);
}

TEST(Stages, UnknownStage) {
  EXPECT_EQ(code_of([] { run_stage("sharpen", RunConfig{}, {}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(stage_names().size(), 10u);
}

TEST(Stages, DryRunWritesNothing) {
  support::TempDir dir;
  const auto manifest = support::write_synthetic_dataset(dir / "data", {{4, 4}, 32, 1, true});
  const auto work = dir / "work";
  StageOptions o;
  o.dry_run = true;
  const auto out = run_stage("pipeline", small_config(work, manifest), o);
  EXPECT_FALSE(fs::exists(work));
  ASSERT_EQ(out.plan.size(), 7u);
  EXPECT_EQ(out.plan[0].rfind("split: ", 0), 0u);
  EXPECT_EQ(out.plan[6].rfind("evaluate: ", 0), 0u);
  EXPECT_TRUE(out.logs.empty());
}

TEST(Stages, FullPipelineWithLogsAndResume) {
  support::TempDir dir;
  const auto manifest = support::write_synthetic_dataset(dir / "data", {{15, 6, 9}, 32, 2, true});
  const auto work = dir / "work";
  const auto config = small_config(work, manifest);
  const auto first = run_stage("pipeline", config, {});
  EXPECT_TRUE(first.skipped.empty());
  EXPECT_EQ(first.logs.size(), 7u);
  for (const char* f : {"manifest.split.csv", "enhanced/manifest.csv", "augmented/manifest.csv",
                        "augmented/plan_train.json", "features/train.csv", "features/test.csv", "model.json",
                        "scores_test.csv", "report/report.json", "report/confusion.csv", "logs/evaluate.json"}) {
    EXPECT_TRUE(fs::exists(work / f)) << f;
  }
  const auto log = json::parse(csv::read_text(work / "logs" / "train.json"));
  EXPECT_EQ(log["stage"], "train");
  EXPECT_EQ(log["version"], std::string(kVersion));
  EXPECT_EQ(log["seed"], config.stage_seed("train").value);
  EXPECT_FALSE(log["inputs"].empty());
  EXPECT_FALSE(log["outputs"].empty());
  const auto report = json::parse(csv::read_text(work / "report" / "report.json"));
  EXPECT_EQ(report["metadata"]["classifier"], "knn");
  EXPECT_EQ(report["metadata"]["scores_sha256"], sha256_file(work / "scores_test.csv"));

  // Train split is balanced to the largest class rounded up to ten.
  const auto aug = load_manifest(work / "augmented" / "manifest.csv");
  std::map<int, int> train_counts;
  for (const auto& r : aug.records)
    if (r.split == Split::kTrain) train_counts[r.label]++;
  for (int c = 0; c < 3; ++c) EXPECT_EQ(train_counts[c], 10) << c;

  StageOptions resume;
  resume.resume = true;
  const auto again = run_stage("pipeline", config, resume);
  EXPECT_EQ(again.skipped.size(), 7u);
  EXPECT_TRUE(again.logs.empty());

  // Touching the model invalidates train's outputs, so train reruns; later
  // stages see the same hashed inputs once train restores the model.
  csv::write_text(work / "model.json", "{}");
  const auto third = run_stage("pipeline", config, resume);
  EXPECT_EQ(std::count(third.skipped.begin(), third.skipped.end(), "train"), 0);
  EXPECT_EQ(std::count(third.skipped.begin(), third.skipped.end(), "evaluate"), 1);

  // Any changed knob changes every fingerprint.
  auto changed = config;
  changed.apply_json(R"({"k": 1})");
  const auto fourth = run_stage("pipeline", changed, resume);
  EXPECT_TRUE(fourth.skipped.empty());
}

TEST(Stages, RerunsAreDeterministic) {
  support::TempDir dir;
  const auto manifest = support::write_synthetic_dataset(dir / "data", {{12, 5, 7}, 32, 4, true});
  run_stage("pipeline", small_config(dir / "a", manifest), {});
  auto second = small_config(dir / "b", manifest);
  second.jobs = 4;
  run_stage("pipeline", second, {});
  EXPECT_EQ(csv::read_text(dir / "a" / "report" / "report.json"), csv::read_text(dir / "b" / "report" / "report.json"));
  for (const auto& e : fs::directory_iterator(dir / "a" / "augmented")) {
    if (e.path().extension() != ".png") continue;
    EXPECT_EQ(sha256_file(e.path()), sha256_file(dir / "b" / "augmented" / e.path().filename()));
  }
}

TEST(Stages, IndividualStagesAndErrors) {
  support::TempDir dir;
  const auto manifest = support::write_synthetic_dataset(dir / "data", {{5, 5}, 32, 5, true});
  auto config = small_config(dir / "w", manifest);
  EXPECT_EQ(code_of([&] { run_stage("train", config, {}); }), ErrorCode::kNotFound);
  run_stage("split", config, {});
  // Drop one mask: enhance reports it and carries on.
  fs::remove(dir / "data" / "masks" / "c00_000.png");
  const auto enh = run_stage("enhance", config, {});
  EXPECT_TRUE(has_warning(enh.warnings, "c00_000"));
  config.augment = false;
  StageOptions feat;
  feat.input = dir / "w" / "enhanced" / "manifest.csv";
  run_stage("features", config, feat);
  StageOptions imp;
  imp.input = dir / "w" / "features" / "train.csv";
  const auto out = run_stage("features-import", config, imp);
  EXPECT_TRUE(fs::exists(dir / "w" / "features" / "imported.csv"));
  StageOptions init;
  EXPECT_EQ(code_of([&] { run_stage("manifest-init", config, init); }), ErrorCode::kInvalidArgument);
  StageOptions eval;
  eval.input = dir / "nope.csv";
  EXPECT_EQ(code_of([&] { run_stage("evaluate", config, eval); }), ErrorCode::kNotFound);
}

TEST(Stages, StandardizedFeatures) {
  support::TempDir dir;
  const auto manifest = support::write_synthetic_dataset(dir / "data", {{10, 10}, 32, 6, true});
  auto config = small_config(dir / "w", manifest);
  config.apply_json(R"({"standardize": true, "augment": false, "classifier": "logreg", "epochs": 20})");
  run_stage("pipeline", config, {});
  EXPECT_TRUE(fs::exists(dir / "w" / "features" / "standardization.json"));
  const auto train = import_feature_table(dir / "w" / "features" / "train.csv");
  for (std::size_t j = 0; j < train.dimension; ++j) {
    double m = 0;
    for (const auto& r : train.rows) m += r.values[j];
    EXPECT_NEAR(m / static_cast<double>(train.rows.size()), 0.0, 1e-9);
  }
}
