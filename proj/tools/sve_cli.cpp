// Command-line front end. Everything goes through the C API in sve/sve.h;
// this file only turns flags into a stage request and prints the result.

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sve/sve.h"

namespace {

using nlohmann::json;

// Collects flags that map onto run-config keys; only flags the user actually
// gave end up in the overrides, so config-file values survive.
class Knobs {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    auto* opt = app->add_option(flag, *value, help);
    setters_.push_back([opt, value, key](json& out) {
      if (opt->count()) out[key] = *value;
    });
  }

  void flag(CLI::App* app, const std::string& flag, const std::string& key, bool value, const std::string& help) {
    auto* opt = app->add_flag(flag, help);
    setters_.push_back([opt, key, value](json& out) {
      if (opt->count()) out[key] = value;
    });
  }

  void ratios(CLI::App* app) {
    auto value = std::make_shared<std::vector<double>>();
    auto* opt = app->add_option("--ratios", *value, "train,val,test split ratios")->delimiter(',')->expected(3);
    setters_.push_back([opt, value](json& out) {
      if (!opt->count()) return;
      out["split_train"] = (*value)[0];
      out["split_val"] = (*value)[1];
      out["split_test"] = (*value)[2];
    });
  }

  // --params cell=8,bins=9,radius=2 ... onto the hog_/lbp_ keys.
  void params(CLI::App* app) {
    auto value = std::make_shared<std::vector<std::string>>();
    auto* opt = app->add_option("--params", *value, "descriptor parameters: cell,block,stride,bins,signed,radius,neighbors,uniform")
                    ->delimiter(',');
    setters_.push_back([opt, value](json& out) {
      if (!opt->count()) return;
      static const std::map<std::string, std::string> keys = {
          {"cell", "hog_cell"},     {"block", "hog_block"},     {"stride", "hog_stride"},
          {"bins", "hog_bins"},     {"signed", "hog_signed"},   {"radius", "lbp_radius"},
          {"neighbors", "lbp_neighbors"}, {"uniform", "lbp_uniform"}};
      for (const auto& item : *value) {
        const auto eq = item.find('=');
        const auto name = item.substr(0, eq);
        if (eq == std::string::npos || !keys.count(name)) throw CLI::ValidationError("--params", "bad entry '" + item + "'");
        const auto text = item.substr(eq + 1);
        const auto& key = keys.at(name);
        if (key == "hog_signed" || key == "lbp_uniform") {
          if (text != "true" && text != "false") throw CLI::ValidationError("--params", name + " must be true or false");
          out[key] = text == "true";
        } else {
          try {
            std::size_t used = 0;
            const int v = std::stoi(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            out[key] = v;
          } catch (const std::exception&) {
            throw CLI::ValidationError("--params", name + " must be an integer");
          }
        }
      }
    });
  }

  json overrides() const {
    json out = json::object();
    for (const auto& set : setters_) set(out);
    return out;
  }

 private:
  std::vector<std::function<void(json&)>> setters_;
};

// Path flags that become request fields rather than config keys.
class Paths {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& field, const std::string& help,
           bool required = false) {
    auto value = std::make_shared<std::string>();
    auto* opt = app->add_option(flag, *value, help);
    if (required) opt->required();
    entries_.push_back({opt, value, field});
  }

  void fill(json& request) const {
    for (const auto& e : entries_) {
      if (e.opt->count()) request[e.field] = *e.value;
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::shared_ptr<std::string> value;
    std::string field;
  };
  std::vector<Entry> entries_;
};

void strategy_knobs(Knobs& k, CLI::App* app) {
  k.add<std::string>(app, "--strategy", "strategy",
                     "vessel-only|weighted-origin|weighted-background|gamma-origin|heatmap-origin");
  k.add<double>(app, "--weight", "weight", "vessel weight (default 0.2)");
  k.add<double>(app, "--gamma", "gamma", "gamma for gamma-origin (default 0.5)");
}

void augment_knobs(Knobs& k, CLI::App* app) {
  k.add<std::uint64_t>(app, "--target", "augment_target", "samples per class (0 = largest class rounded up to 10)");
  k.add<std::vector<double>>(app, "--angles", "augment_angles", "rotation angles in degrees, comma separated");
  k.add<std::vector<std::string>>(app, "--augment-splits", "augment_splits", "splits to balance (default train)");
  k.add<double>(app, "--noise-std", "noise_std", "gaussian noise standard deviation (default 10)");
  k.add<std::uint64_t>(app, "--augment-seed", "augment_seed", "seed for the balancing plan");
  k.flag(app, "--random-crop", "random_crop", true, "append a crop-and-resize step to every derived sample");
  app->get_option("--angles")->delimiter(',');
  app->get_option("--augment-splits")->delimiter(',');
}

void feature_knobs(Knobs& k, CLI::App* app) {
  k.add<std::string>(app, "--descriptor", "descriptor", "lbp|hog");
  k.add<int>(app, "--size", "image_size", "resize images to N x N before extraction (default 224)");
  k.add<int>(app, "--lbp-radius", "lbp_radius", "LBP radius");
  k.add<int>(app, "--lbp-neighbors", "lbp_neighbors", "LBP sampling points");
  k.add<int>(app, "--hog-cell", "hog_cell", "HOG cell size in pixels");
  k.add<int>(app, "--hog-bins", "hog_bins", "HOG orientation bins");
  k.flag(app, "--standardize", "standardize", true, "z-score features with training statistics");
  k.params(app);
}

void classifier_knobs(Knobs& k, CLI::App* app, bool model_alias) {
  k.add<std::string>(app, model_alias ? "--model,--classifier" : "--classifier", "classifier", "knn|mlp|logreg|lda");
  k.add<int>(app, "--k", "k", "neighbours for knn (default 5)");
  k.add<int>(app, "--hidden", "hidden_units", "mlp hidden units (default 256)");
  k.add<double>(app, "--lr", "learning_rate", "learning rate");
  k.add<int>(app, "--epochs", "epochs", "training epochs");
  k.add<int>(app, "--batch-size", "batch_size", "minibatch size (0 = full batch)");
  k.add<std::uint64_t>(app, "--model-seed", "model_seed", "seed for weight initialisation");
}

int run(const std::string& stage, const json& request) {
  char* result = nullptr;
  const auto status = sve_run_stage(stage.c_str(), request.dump().c_str(), &result);
  if (status != SVE_OK) {
    std::cerr << "sve " << stage << ": error [" << sve_status_name(status) << "]: " << sve_last_error() << "\n";
    return sve_exit_code(status);
  }
  const auto outcome = json::parse(result);
  sve_string_free(result);
  for (const auto& w : outcome["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  for (const auto& p : outcome["plan"]) std::cout << "plan " << p.get<std::string>() << "\n";
  for (const auto& s : outcome["skipped"]) std::cout << "resumed " << s.get<std::string>() << "\n";
  for (const auto& a : outcome["artifacts"]) std::cout << a.get<std::string>() << "\n";
  for (const auto& l : outcome["logs"]) std::cout << l.get<std::string>() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmentation-based vascular enhancement and classification pipeline", "sve"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sve_version()));

  Knobs knobs;
  std::string config_file;
  bool dry_run = false;
  app.add_option("--config", config_file, "JSON run config; flags override its values");
  knobs.add<std::uint64_t>(&app, "--seed", "seed", "master seed");
  knobs.add<unsigned>(&app, "--jobs", "jobs", "worker threads (0 = all cores)");
  knobs.add<std::string>(&app, "--work-dir", "work_dir", "directory for default stage outputs");
  knobs.flag(&app, "--check-files", "check_files", true, "verify manifest files exist and masks match images");
  app.add_flag("--dry-run", dry_run, "print the stage plan without writing anything");
  app.fallthrough();

  Paths paths;
  std::string stage;
  // nested callbacks fire child first; keep the deepest
  auto bind = [&](CLI::App* sub, const std::string& name) {
    sub->callback([&stage, name] {
      if (stage.empty()) stage = name;
    });
  };

  auto* manifest = app.add_subcommand("manifest", "manifest helpers");
  manifest->require_subcommand(1);
  auto* init = manifest->add_subcommand("init", "build a manifest from an image directory and a label list");
  paths.add(init, "--images", "images", "directory of .png/.ppm images", true);
  paths.add(init, "--labels", "labels", "label list: '<stem> <label>' per line", true);
  paths.add(init, "--masks", "masks", "directory of masks sharing image stems");
  paths.add(init, "--out", "output", "manifest to write");
  bind(init, "manifest-init");

  auto* split = app.add_subcommand("split", "stratified train/val/test split");
  paths.add(split, "--manifest", "input", "input manifest");
  paths.add(split, "--out", "output", "split manifest to write");
  knobs.ratios(split);
  knobs.add<std::uint64_t>(split, "--split-seed", "split_seed", "seed for the split shuffle");
  bind(split, "split");

  auto* enhance = app.add_subcommand("enhance", "apply vessel enhancement to every manifest row");
  paths.add(enhance, "--manifest", "input", "input manifest");
  paths.add(enhance, "--out", "output", "output directory");
  strategy_knobs(knobs, enhance);
  bind(enhance, "enhance");

  auto* augment = app.add_subcommand("augment", "balance classes with seeded augmentation");
  paths.add(augment, "--manifest", "input", "input manifest");
  paths.add(augment, "--out", "output", "output directory");
  augment_knobs(knobs, augment);
  bind(augment, "augment");

  auto* features = app.add_subcommand("features", "extract HOG or LBP feature tables");
  paths.add(features, "--manifest", "input", "input manifest");
  paths.add(features, "--out", "output", "output directory");
  feature_knobs(knobs, features);
  bind(features, "features");
  auto* import = features->add_subcommand("import", "validate an externally produced feature table");
  paths.add(import, "input", "input", "feature CSV (id,label,f0,...)", true);
  paths.add(import, "--out", "output", "normalized copy to write");
  bind(import, "features-import");

  auto* train = app.add_subcommand("train", "fit a classifier on a feature table");
  paths.add(train, "--features", "input", "training feature CSV");
  paths.add(train, "--out", "output", "model file to write");
  classifier_knobs(knobs, train, true);
  bind(train, "train");

  auto* predict = app.add_subcommand("predict", "score a feature table with a trained model");
  paths.add(predict, "--model", "model", "model file");
  paths.add(predict, "--features", "input", "feature CSV to score");
  paths.add(predict, "--out", "output", "score CSV to write");
  bind(predict, "predict");

  auto* evaluate = app.add_subcommand("evaluate", "metrics, confusion matrix and ROC from scores");
  paths.add(evaluate, "--scores", "input", "score CSV");
  paths.add(evaluate, "--out", "output", "report directory");
  bind(evaluate, "evaluate");

  bool resume = false;
  auto* pipeline = app.add_subcommand("pipeline", "split, enhance, augment, features, train, predict, evaluate");
  paths.add(pipeline, "--manifest", "input", "input manifest");
  pipeline->add_flag("--resume", resume, "reuse stages whose inputs and outputs are unchanged");
  knobs.ratios(pipeline);
  strategy_knobs(knobs, pipeline);
  augment_knobs(knobs, pipeline);
  knobs.flag(pipeline, "--no-augment", "augment", false, "skip the augmentation stage");
  feature_knobs(knobs, pipeline);
  classifier_knobs(knobs, pipeline, false);
  bind(pipeline, "pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  json request = json::object();
  if (!config_file.empty()) request["config_file"] = config_file;
  try {
    request["config"] = knobs.overrides();
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  paths.fill(request);
  if (dry_run) request["dry_run"] = true;
  if (resume) request["resume"] = true;
  return run(stage, request);
}
