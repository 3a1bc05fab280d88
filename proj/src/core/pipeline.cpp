#include "sve/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <thread>

#include "json.hpp"
#include "sve/csv.hpp"
#include "sve/evaluation.hpp"
#include "sve/hashing.hpp"
#include "sve/scores.hpp"

namespace sve {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kOptionalSeeds = {"split_seed", "augment_seed", "model_seed"};

json optional_seed(const std::optional<std::uint64_t>& s) { return s ? json(*s) : json(nullptr); }

void check_type(const std::string& key, const json& current, const json& value) {
  bool ok = false;
  if (kOptionalSeeds.count(key)) {
    ok = value.is_null() || value.is_number_unsigned();
  } else if (current.is_boolean()) {
    ok = value.is_boolean();
  } else if (current.is_string()) {
    ok = value.is_string();
  } else if (current.is_number_unsigned()) {
    ok = value.is_number_unsigned();
  } else if (current.is_number_integer()) {
    ok = value.is_number_integer();
  } else if (current.is_number_float()) {
    ok = value.is_number();
  } else if (current.is_array()) {
    ok = value.is_array();
  }
  if (!ok) fail(ErrorCode::kInvalidArgument, "config key '" + key + "' has the wrong type");
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string RunConfig::to_json() const {
  json j = {{"work_dir", work_dir},
            {"manifest", manifest},
            {"seed", seed},
            {"split_seed", optional_seed(split_seed)},
            {"augment_seed", optional_seed(augment_seed)},
            {"model_seed", optional_seed(model_seed)},
            {"jobs", jobs},
            {"check_files", check_files},
            {"split_train", split_train},
            {"split_val", split_val},
            {"split_test", split_test},
            {"strategy", strategy},
            {"weight", weight},
            {"gamma", gamma},
            {"augment", augment},
            {"augment_target", augment_target},
            {"augment_angles", augment_angles},
            {"augment_splits", augment_splits},
            {"noise_mean", noise_mean},
            {"noise_std", noise_std},
            {"random_crop", random_crop},
            {"crop_ratio", crop_ratio},
            {"descriptor", descriptor},
            {"image_size", image_size},
            {"lbp_radius", lbp_radius},
            {"lbp_neighbors", lbp_neighbors},
            {"lbp_uniform", lbp_uniform},
            {"hog_cell", hog_cell},
            {"hog_block", hog_block},
            {"hog_stride", hog_stride},
            {"hog_bins", hog_bins},
            {"hog_signed", hog_signed},
            {"standardize", standardize},
            {"classifier", classifier},
            {"k", k},
            {"hidden_units", hidden_units},
            {"learning_rate", learning_rate},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"l2", l2},
            {"mlp_l2", mlp_l2},
            {"ridge", ridge},
            {"zero_init", zero_init}};
  return j.dump(2) + "\n";
}

void RunConfig::apply_json(std::string_view text) {
  json overrides;
  try {
    overrides = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  if (!overrides.is_object()) fail(ErrorCode::kInvalidArgument, "config must be a JSON object");
  json merged = json::parse(to_json());
  for (const auto& [key, value] : overrides.items()) {
    if (!merged.contains(key)) fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
    check_type(key, merged[key], value);
    merged[key] = value;
  }
  auto seed_of = [&](const char* key) -> std::optional<std::uint64_t> {
    const auto& v = merged.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<std::uint64_t>();
  };
  try {
    work_dir = merged.at("work_dir");
    manifest = merged.at("manifest");
    seed = merged.at("seed");
    split_seed = seed_of("split_seed");
    augment_seed = seed_of("augment_seed");
    model_seed = seed_of("model_seed");
    jobs = merged.at("jobs");
    check_files = merged.at("check_files");
    split_train = merged.at("split_train");
    split_val = merged.at("split_val");
    split_test = merged.at("split_test");
    strategy = merged.at("strategy");
    weight = merged.at("weight");
    gamma = merged.at("gamma");
    augment = merged.at("augment");
    augment_target = merged.at("augment_target");
    augment_angles = merged.at("augment_angles").get<std::vector<double>>();
    augment_splits = merged.at("augment_splits").get<std::vector<std::string>>();
    noise_mean = merged.at("noise_mean");
    noise_std = merged.at("noise_std");
    random_crop = merged.at("random_crop");
    crop_ratio = merged.at("crop_ratio");
    descriptor = merged.at("descriptor");
    image_size = merged.at("image_size");
    lbp_radius = merged.at("lbp_radius");
    lbp_neighbors = merged.at("lbp_neighbors");
    lbp_uniform = merged.at("lbp_uniform");
    hog_cell = merged.at("hog_cell");
    hog_block = merged.at("hog_block");
    hog_stride = merged.at("hog_stride");
    hog_bins = merged.at("hog_bins");
    hog_signed = merged.at("hog_signed");
    standardize = merged.at("standardize");
    classifier = merged.at("classifier");
    k = merged.at("k");
    hidden_units = merged.at("hidden_units");
    learning_rate = merged.at("learning_rate");
    epochs = merged.at("epochs");
    batch_size = merged.at("batch_size");
    l2 = merged.at("l2");
    mlp_l2 = merged.at("mlp_l2");
    ridge = merged.at("ridge");
    zero_init = merged.at("zero_init");
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
  for (const auto& [key, value] : overrides.items()) explicit_keys.insert(key);
}

RunConfig RunConfig::load(const fs::path& path) {
  RunConfig config;
  config.apply_json(csv::read_text(path));
  return config;
}

void RunConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kInvalidArgument, msg); };
  if (work_dir.empty()) bad("work_dir must not be empty");
  sve_strategy().validate();
  for (double r : {split_train, split_val, split_test}) {
    if (!(r > 0.0) || !finite(r)) bad("split ratios must be positive");
  }
  if (std::abs(split_train + split_val + split_test - 1.0) > 1e-9) bad("split ratios must sum to 1");
  for (double a : augment_angles) {
    if (!finite(a)) bad("augment_angles must be finite");
  }
  if (!finite(noise_mean) || !finite(noise_std) || noise_std < 0.0) bad("noise_std must be finite and >= 0");
  if (!(crop_ratio > 0.0 && crop_ratio <= 1.0)) bad("crop_ratio must lie in (0, 1]");
  augment_split_set();
  if (descriptor != "lbp" && descriptor != "hog") bad("descriptor must be lbp or hog");
  if (image_size < 8 || image_size > 4096) bad("image_size must lie in [8, 4096]");
  const auto dc = descriptor_config();
  if (dc.kind == DescriptorKind::kHog) {
    dc.hog.validate();
    if (hog_dimension(image_size, image_size, dc.hog) == 0) bad("image_size is smaller than one HOG block");
  } else {
    dc.lbp.validate();
    if (image_size <= 2 * lbp_radius) bad("image_size must exceed twice the LBP radius");
  }
  classifier_spec().validate();
}

std::vector<std::string> RunConfig::warnings() const {
  std::vector<std::string> out;
  auto set = [&](const char* key) { return explicit_keys.count(key) > 0; };
  const auto variant = parse_variant(strategy);
  const bool uses_weight =
      variant == SveVariant::kWeightedPlusOrigin || variant == SveVariant::kWeightedPlusBackground;
  if (set("weight") && !uses_weight) out.push_back("weight is unused by the " + strategy + " strategy");
  if (set("gamma") && variant != SveVariant::kGammaVesselPlusOrigin) {
    out.push_back("gamma is unused by the " + strategy + " strategy");
  }
  for (const char* key : {"hog_cell", "hog_block", "hog_stride", "hog_bins", "hog_signed"}) {
    if (set(key) && descriptor != "hog") out.push_back(std::string(key) + " is unused by the lbp descriptor");
  }
  for (const char* key : {"lbp_radius", "lbp_neighbors", "lbp_uniform"}) {
    if (set(key) && descriptor != "lbp") out.push_back(std::string(key) + " is unused by the hog descriptor");
  }
  const bool gd = classifier == "mlp" || classifier == "logreg";
  const std::map<std::string, bool> used = {
      {"k", classifier == "knn"},        {"hidden_units", classifier == "mlp"}, {"mlp_l2", classifier == "mlp"},
      {"l2", classifier == "logreg"},    {"ridge", classifier == "lda"},        {"learning_rate", gd},
      {"epochs", gd},                    {"batch_size", gd},                    {"zero_init", gd}};
  for (const auto& [key, is_used] : used) {
    if (set(key.c_str()) && !is_used) out.push_back(key + " is unused by the " + classifier + " classifier");
  }
  if (!augment) {
    for (const char* key : {"augment_target", "augment_angles", "augment_splits", "augment_seed", "random_crop"}) {
      if (set(key)) out.push_back(std::string(key) + " is unused because augment is false");
    }
  }
  return out;
}

SveStrategy RunConfig::sve_strategy() const { return {parse_variant(strategy), weight, gamma}; }

SplitRatios RunConfig::split_ratios() const { return {split_train, split_val, split_test}; }

BalanceOptions RunConfig::balance_options() const {
  BalanceOptions o;
  o.target = static_cast<std::size_t>(augment_target);
  o.angles = augment_angles;
  o.noise_mean = noise_mean;
  o.noise_std = noise_std;
  o.random_crop = random_crop;
  o.crop_ratio = crop_ratio;
  return o;
}

std::set<Split> RunConfig::augment_split_set() const {
  std::set<Split> out;
  for (const auto& name : augment_splits) {
    Split s;
    try {
      s = parse_split(name);
    } catch (const Error&) {
      fail(ErrorCode::kInvalidArgument, "augment_splits: unknown split '" + name + "'");
    }
    if (s == Split::kUnassigned) fail(ErrorCode::kInvalidArgument, "augment_splits cannot name unassigned");
    out.insert(s);
  }
  return out;
}

DescriptorConfig RunConfig::descriptor_config() const {
  DescriptorConfig c;
  c.kind = descriptor == "hog" ? DescriptorKind::kHog : DescriptorKind::kLbp;
  c.size = image_size;
  c.lbp.radius = lbp_radius;
  c.lbp.neighbors = lbp_neighbors;
  c.lbp.uniform = lbp_uniform;
  c.hog.cell_size = hog_cell;
  c.hog.block_size = hog_block;
  c.hog.block_stride = hog_stride;
  c.hog.bins = hog_bins;
  c.hog.signed_gradients = hog_signed;
  return c;
}

ClassifierSpec RunConfig::classifier_spec() const {
  ClassifierSpec s;
  s.kind = parse_classifier_kind(classifier);
  s.k = k;
  s.hidden_units = hidden_units;
  s.learning_rate = learning_rate;
  s.epochs = epochs;
  s.batch_size = batch_size;
  s.l2 = l2;
  s.mlp_l2 = mlp_l2;
  s.ridge = ridge;
  s.zero_init = zero_init;
  s.seed = stage_seed("train").value;
  return s;
}

RngSeed RunConfig::stage_seed(std::string_view stage) const {
  const std::optional<std::uint64_t>* pinned = nullptr;
  if (stage == "split") pinned = &split_seed;
  if (stage == "augment") pinned = &augment_seed;
  if (stage == "train") pinned = &model_seed;
  if (pinned && pinned->has_value()) return RngSeed{**pinned};
  return derive_seed(RngSeed{seed}, stage);
}

unsigned RunConfig::worker_count() const {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string StageOutcome::to_json() const {
  auto paths = [](const std::vector<fs::path>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back(p.generic_string());
    return a;
  };
  json j = {{"artifacts", paths(artifacts)},
            {"warnings", warnings},
            {"plan", plan},
            {"skipped", skipped},
            {"logs", paths(logs)}};
  return j.dump(2) + "\n";
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"manifest-init", "split", "enhance", "augment", "features",
                                                 "features-import", "train", "predict", "evaluate", "pipeline"};
  return names;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return 0;
    case ErrorCode::kInvalidArgument: return 2;
    case ErrorCode::kNotFound:
    case ErrorCode::kMalformed:
    case ErrorCode::kUnsupported:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kIo:
    case ErrorCode::kClassMismatch: return 3;
    case ErrorCode::kNonFinite:
    case ErrorCode::kDegenerate: return 4;
    case ErrorCode::kInternal: break;
  }
  return 1;
}

namespace {

struct Layout {
  fs::path work;
  fs::path split_manifest() const { return work / "manifest.split.csv"; }
  fs::path enhanced() const { return work / "enhanced"; }
  fs::path augmented() const { return work / "augmented"; }
  fs::path features() const { return work / "features"; }
  fs::path model() const { return work / "model.json"; }
  fs::path scores() const { return work / "scores_test.csv"; }
  fs::path report() const { return work / "report"; }
  fs::path logs() const { return work / "logs"; }
};

fs::path pick(const fs::path& given, const fs::path& fallback) { return given.empty() ? fallback : given; }

// Hashed record of one stage execution.
struct StageLog {
  std::string stage;
  std::uint64_t seed = 0;
  json inputs = json::object();
  json outputs = json::object();
  std::vector<fs::path> artifacts;
  std::vector<std::string> warnings;

  void input(const fs::path& p) { inputs[p.generic_string()] = sha256_file(p); }
  void output(const fs::path& p) { outputs[p.generic_string()] = sha256_file(p); }
  void artifact(const fs::path& p) { artifacts.push_back(p); }
};

std::string fingerprint(const StageLog& log, const RunConfig& config) {
  json cfg = json::parse(config.to_json());
  cfg.erase("jobs");
  cfg.erase("work_dir");
  return sha256_hex(log.stage + "\n" + cfg.dump() + "\n" + log.inputs.dump());
}

bool reusable(const fs::path& log_path, const std::string& fp, std::vector<fs::path>& artifacts) {
  if (!fs::exists(log_path)) return false;
  try {
    const auto j = json::parse(csv::read_text(log_path));
    if (j.at("fingerprint") != fp) return false;
    for (const auto& [path, hash] : j.at("outputs").items()) {
      if (!fs::exists(path) || sha256_file(path) != hash.get<std::string>()) return false;
    }
    for (const auto& a : j.at("artifacts")) artifacts.emplace_back(a.get<std::string>());
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

using Body = std::function<void(StageLog&)>;

// Hashes inputs, honours resume, runs the body and writes the stage log.
void execute(const std::string& stage, const RunConfig& config, const StageOptions& options,
             const std::vector<fs::path>& inputs, StageOutcome& outcome, const Body& body) {
  StageLog log;
  log.stage = stage;
  log.seed = config.stage_seed(stage).value;
  for (const auto& p : inputs) log.input(p);
  const auto fp = fingerprint(log, config);
  const auto log_path = Layout{config.work_dir}.logs() / (stage + ".json");
  if (options.resume) {
    std::vector<fs::path> reused;
    if (reusable(log_path, fp, reused)) {
      outcome.skipped.push_back(stage);
      outcome.artifacts.insert(outcome.artifacts.end(), reused.begin(), reused.end());
      return;
    }
  }
  body(log);
  json artifacts = json::array();
  for (const auto& a : log.artifacts) artifacts.push_back(a.generic_string());
  const json doc = {{"stage", stage},
                    {"version", std::string(kVersion)},
                    {"seed", log.seed},
                    {"config", json::parse(config.to_json())},
                    {"inputs", log.inputs},
                    {"outputs", log.outputs},
                    {"artifacts", artifacts},
                    {"fingerprint", fp},
                    {"warnings", log.warnings}};
  csv::write_text(log_path, doc.dump(2) + "\n");
  outcome.logs.push_back(log_path);
  outcome.artifacts.insert(outcome.artifacts.end(), log.artifacts.begin(), log.artifacts.end());
  outcome.warnings.insert(outcome.warnings.end(), log.warnings.begin(), log.warnings.end());
}

std::vector<fs::path> manifest_inputs(const fs::path& manifest_path, const Manifest& m, bool with_masks,
                                      const std::set<Split>* splits = nullptr) {
  std::vector<fs::path> in = {manifest_path};
  for (const auto& r : m.records) {
    if (splits && !splits->count(r.split)) continue;
    if (fs::exists(r.image)) in.push_back(r.image);
    if (with_masks && r.mask && fs::exists(*r.mask)) in.push_back(*r.mask);
  }
  return in;
}

std::string arrow(std::string_view stage, const fs::path& in, const fs::path& out) {
  return std::string(stage) + ": " + in.generic_string() + " -> " + out.generic_string();
}

void stage_manifest_init(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  if (options.images.empty() || options.labels.empty()) {
    fail(ErrorCode::kInvalidArgument, "manifest init needs an images directory and a labels file");
  }
  const auto out = pick(options.output, Layout{config.work_dir}.work / "manifest.csv");
  if (options.dry_run) {
    outcome.plan.push_back(arrow("manifest-init", options.images, out));
    return;
  }
  execute("manifest-init", config, options, {options.labels}, outcome, [&](StageLog& log) {
    std::optional<fs::path> masks;
    if (!options.masks.empty()) masks = options.masks;
    auto result = manifest_init(options.images, options.labels, masks);
    save_manifest(result.manifest, out);
    log.output(out);
    log.artifact(out);
    log.warnings = result.warnings;
    if (result.skipped) {
      log.warnings.push_back(std::to_string(result.skipped) + " label rows skipped (label outside 0..13)");
    }
  });
}

void stage_split(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  const fs::path in = pick(options.input, config.manifest);
  if (in.empty()) fail(ErrorCode::kInvalidArgument, "split needs an input manifest");
  const auto out = pick(options.output, Layout{config.work_dir}.split_manifest());
  if (options.dry_run) {
    outcome.plan.push_back(arrow("split", in, out));
    return;
  }
  const auto manifest = load_manifest(in, {config.check_files});
  execute("split", config, options, {in}, outcome, [&](StageLog& log) {
    const auto split = stratified_split(manifest, config.split_ratios(), config.stage_seed("split"));
    save_manifest(split, out);
    log.output(out);
    log.artifact(out);
  });
}

void stage_enhance(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  const Layout layout{config.work_dir};
  const auto in = pick(options.input, layout.split_manifest());
  const auto out_dir = pick(options.output, layout.enhanced());
  if (options.dry_run) {
    outcome.plan.push_back(arrow("enhance", in, out_dir) + " [" + config.strategy + "]");
    return;
  }
  const auto manifest = load_manifest(in, {config.check_files});
  execute("enhance", config, options, manifest_inputs(in, manifest, true), outcome, [&](StageLog& log) {
    const auto result = batch_enhance(manifest, config.sve_strategy(), out_dir, config.worker_count());
    const auto out = out_dir / "manifest.csv";
    save_manifest(result.manifest, out);
    for (const auto& r : result.manifest.records) log.output(r.image);
    log.output(out);
    log.artifact(out);
    log.artifact(out_dir);
    for (const auto& e : result.errors) log.warnings.push_back("enhance: row " + e.id + ": " + e.message);
  });
}

void stage_augment(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  const Layout layout{config.work_dir};
  const auto in = pick(options.input, layout.enhanced() / "manifest.csv");
  const auto out_dir = pick(options.output, layout.augmented());
  if (options.dry_run) {
    outcome.plan.push_back(arrow("augment", in, out_dir));
    return;
  }
  const auto manifest = load_manifest(in, {config.check_files});
  const auto splits = config.augment_split_set();
  execute("augment", config, options, manifest_inputs(in, manifest, false, &splits), outcome, [&](StageLog& log) {
    Manifest result = manifest;
    for (Split split : splits) {
      const auto members = class_members(result, {split});
      if (members.empty()) {
        log.warnings.push_back("augment: no samples in the " + std::string(to_string(split)) + " split");
        continue;
      }
      auto opts = config.balance_options();
      if (opts.target == 0) opts.target = default_balance_target(members);
      const auto plan = build_balance_plan(members, opts, derive_seed(config.stage_seed("augment"), to_string(split)));
      const auto plan_path = out_dir / ("plan_" + std::string(to_string(split)) + ".json");
      csv::write_text(plan_path, plan.to_json());
      log.output(plan_path);
      log.artifact(plan_path);
      result = execute_plan(plan, result, {out_dir, {split}, config.worker_count()});
      for (const auto& [label, samples] : plan.per_class) {
        for (const auto& s : samples) log.output(out_dir / (s.derived_id + ".png"));
      }
    }
    const auto out = out_dir / "manifest.csv";
    save_manifest(result, out);
    log.output(out);
    log.artifact(out);
  });
}

void stage_features(const RunConfig& config, const StageOptions& options, StageOutcome& outcome,
                    const fs::path& default_input) {
  const Layout layout{config.work_dir};
  const auto in = pick(options.input, default_input);
  const auto out_dir = pick(options.output, layout.features());
  const auto cfg = config.descriptor_config();
  if (options.dry_run) {
    outcome.plan.push_back(arrow("features", in, out_dir) + " [" + cfg.descriptor_id() + "]");
    return;
  }
  const auto manifest = load_manifest(in, {config.check_files});
  execute("features", config, options, manifest_inputs(in, manifest, false), outcome, [&](StageLog& log) {
    const auto table = extract_batch(manifest, cfg, config.worker_count());
    std::map<Split, FeatureTable> parts;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      auto& part = parts[manifest.records[i].split];
      part.descriptor = table.descriptor;
      part.dimension = table.dimension;
      part.rows.push_back(table.rows[i]);
    }
    if (config.standardize) {
      if (!parts.count(Split::kTrain)) fail(ErrorCode::kInvalidArgument, "standardize needs training rows");
      const auto stats = fit_standardization(parts[Split::kTrain]);
      for (auto& [split, part] : parts) part = apply_standardization(part, stats);
      const json j = {{"mean", stats.mean}, {"stddev", stats.stddev}};
      const auto stats_path = out_dir / "standardization.json";
      csv::write_text(stats_path, j.dump(2) + "\n");
      log.output(stats_path);
      log.artifact(stats_path);
    }
    for (const auto& [split, part] : parts) {
      const auto name = split == Split::kUnassigned ? std::string("all") : std::string(to_string(split));
      const auto path = out_dir / (name + ".csv");
      export_feature_table(part, path);
      log.output(path);
      log.artifact(path);
    }
    if (parts.empty()) log.warnings.push_back("features: manifest has no rows");
  });
}

void stage_features_import(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  if (options.input.empty()) fail(ErrorCode::kInvalidArgument, "features import needs an input table");
  const auto out = pick(options.output, Layout{config.work_dir}.features() / "imported.csv");
  if (options.dry_run) {
    outcome.plan.push_back(arrow("features-import", options.input, out));
    return;
  }
  execute("features-import", config, options, {options.input}, outcome, [&](StageLog& log) {
    export_feature_table(import_feature_table(options.input), out);
    log.output(out);
    log.artifact(out);
  });
}

void stage_train(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  const Layout layout{config.work_dir};
  const auto in = pick(options.input, layout.features() / "train.csv");
  const auto out = pick(options.output, pick(options.model, layout.model()));
  if (options.dry_run) {
    outcome.plan.push_back(arrow("train", in, out) + " [" + config.classifier + "]");
    return;
  }
  execute("train", config, options, {in}, outcome, [&](StageLog& log) {
    const auto model = fit(config.classifier_spec(), import_feature_table(in));
    save_model(model, out);
    log.output(out);
    log.artifact(out);
  });
}

void stage_predict(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  const Layout layout{config.work_dir};
  const auto model_path = pick(options.model, layout.model());
  const auto in = pick(options.input, layout.features() / "test.csv");
  const auto out = pick(options.output, layout.scores());
  if (options.dry_run) {
    outcome.plan.push_back(arrow("predict", in, out) + " [model " + model_path.generic_string() + "]");
    return;
  }
  execute("predict", config, options, {model_path, in}, outcome, [&](StageLog& log) {
    const auto model = load_model(model_path);
    write_scores_csv(predict_scores(model, import_feature_table(in), config.worker_count()), out);
    log.output(out);
    log.artifact(out);
  });
}

void stage_evaluate(const RunConfig& config, const StageOptions& options, StageOutcome& outcome, bool in_pipeline) {
  const Layout layout{config.work_dir};
  const auto in = pick(options.input, layout.scores());
  const auto out_dir = pick(options.output, layout.report());
  if (options.dry_run) {
    outcome.plan.push_back(arrow("evaluate", in, out_dir));
    return;
  }
  execute("evaluate", config, options, {in}, outcome, [&](StageLog& log) {
    std::map<std::string, std::string> metadata = {{"version", std::string(kVersion)},
                                                   {"scores_sha256", sha256_file(in)}};
    if (in_pipeline) {
      metadata["seed"] = std::to_string(config.seed);
      metadata["strategy"] = config.strategy;
      metadata["descriptor"] = config.descriptor_config().descriptor_id();
      metadata["classifier"] = config.classifier;
    }
    const auto report = evaluate_scores(read_scores_csv(in), metadata);
    for (const auto& p : write_report(report, out_dir)) log.output(p);
    log.artifact(out_dir / "report.json");
  });
}

void stage_pipeline(const RunConfig& config, const StageOptions& options, StageOutcome& outcome) {
  const Layout layout{config.work_dir};
  StageOptions step;
  step.dry_run = options.dry_run;
  step.resume = options.resume;
  step.input = options.input;
  stage_split(config, step, outcome);
  step.input.clear();
  stage_enhance(config, step, outcome);
  if (config.augment) {
    stage_augment(config, step, outcome);
  } else if (options.dry_run) {
    outcome.plan.push_back("augment: disabled");
  }
  stage_features(config, step, outcome,
                 (config.augment ? layout.augmented() : layout.enhanced()) / "manifest.csv");
  stage_train(config, step, outcome);
  stage_predict(config, step, outcome);
  stage_evaluate(config, step, outcome, true);
}

}  // namespace

StageOutcome run_stage(std::string_view stage, const RunConfig& config, const StageOptions& options) {
  config.validate();
  StageOutcome outcome;
  outcome.warnings = config.warnings();
  const Layout layout{config.work_dir};
  if (stage == "manifest-init") {
    stage_manifest_init(config, options, outcome);
  } else if (stage == "split") {
    stage_split(config, options, outcome);
  } else if (stage == "enhance") {
    stage_enhance(config, options, outcome);
  } else if (stage == "augment") {
    stage_augment(config, options, outcome);
  } else if (stage == "features") {
    stage_features(config, options, outcome, layout.augmented() / "manifest.csv");
  } else if (stage == "features-import") {
    stage_features_import(config, options, outcome);
  } else if (stage == "train") {
    stage_train(config, options, outcome);
  } else if (stage == "predict") {
    stage_predict(config, options, outcome);
  } else if (stage == "evaluate") {
    stage_evaluate(config, options, outcome, false);
  } else if (stage == "pipeline") {
    stage_pipeline(config, options, outcome);
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown stage '" + std::string(stage) + "'");
  }
  return outcome;
}

}  // namespace sve
