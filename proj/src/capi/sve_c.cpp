#include "sve/sve.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <set>
#include <string>

#include "json.hpp"
#include "sve/classifiers.hpp"
#include "sve/csv.hpp"
#include "sve/enhancement.hpp"
#include "sve/evaluation.hpp"
#include "sve/features.hpp"
#include "sve/pipeline.hpp"
#include "sve/raster_io.hpp"
#include "sve/scores.hpp"

struct sve_image {
  sve::RasterImage value;
};
struct sve_mask {
  sve::VesselMask value;
};
struct sve_features {
  sve::FeatureTable value;
};
struct sve_model {
  sve::TrainedModel value;
};
struct sve_scores {
  sve::ScoreMatrix value;
};

namespace {

thread_local std::string g_last_error;

sve_status set_error(sve_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
sve_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SVE_OK;
  } catch (const sve::Error& e) {
    return set_error(static_cast<sve_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SVE_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(SVE_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(SVE_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) sve::fail(sve::ErrorCode::kInvalidArgument, what);
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

sve::RunConfig config_from(const char* json) {
  sve::RunConfig config;
  if (json) config.apply_json(json);
  config.validate();
  return config;
}

}  // namespace

extern "C" {

const char* sve_version(void) { return sve::kVersion.data(); }

const char* sve_last_error(void) { return g_last_error.c_str(); }

const char* sve_status_name(sve_status status) {
  if (status < SVE_OK || status > SVE_ERR_INTERNAL) return "unknown";
  return sve::to_string(static_cast<sve::ErrorCode>(status));
}

int sve_exit_code(sve_status status) {
  if (status < SVE_OK || status > SVE_ERR_INTERNAL) return 1;
  return sve::exit_code_for(static_cast<sve::ErrorCode>(status));
}

void sve_string_free(char* text) { std::free(text); }

sve_status sve_image_create(uint32_t width, uint32_t height, const uint8_t* rgb, sve_image** out) {
  return guard([&] {
    require(out != nullptr, "out must not be null");
    require(width > 0 && height > 0 && width <= 65535 && height <= 65535, "image dimensions must lie in [1, 65535]");
    auto image = std::make_unique<sve_image>();
    image->value = sve::RasterImage(static_cast<int>(width), static_cast<int>(height));
    if (rgb) std::memcpy(image->value.bytes().data(), rgb, image->value.bytes().size());
    *out = image.release();
  });
}

sve_status sve_image_load(const char* path, sve_image** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new sve_image{sve::load_raster(path)};
  });
}

sve_status sve_image_save(const sve_image* image, const char* path) {
  return guard([&] {
    require(image && path, "image and path must not be null");
    sve::save_raster(image->value, path);
  });
}

sve_status sve_image_size(const sve_image* image, uint32_t* width, uint32_t* height) {
  return guard([&] {
    require(image && width && height, "arguments must not be null");
    *width = static_cast<uint32_t>(image->value.width());
    *height = static_cast<uint32_t>(image->value.height());
  });
}

const uint8_t* sve_image_data(const sve_image* image) { return image ? image->value.bytes().data() : nullptr; }

void sve_image_free(sve_image* image) { delete image; }

sve_status sve_mask_create(uint32_t width, uint32_t height, const uint8_t* values, sve_mask** out) {
  return guard([&] {
    require(values && out, "values and out must not be null");
    require(width > 0 && height > 0 && width <= 65535 && height <= 65535, "mask dimensions must lie in [1, 65535]");
    std::vector<std::uint8_t> v(values, values + static_cast<std::size_t>(width) * height);
    *out = new sve_mask{sve::VesselMask(static_cast<int>(width), static_cast<int>(height), std::move(v))};
  });
}

sve_status sve_mask_load(const char* path, sve_mask** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new sve_mask{sve::load_mask(path)};
  });
}

void sve_mask_free(sve_mask* mask) { delete mask; }

sve_status sve_enhance(const sve_image* image, const sve_mask* mask, const sve_strategy* strategy, sve_image** out) {
  return guard([&] {
    require(image && mask && strategy && out && strategy->variant, "arguments must not be null");
    sve::SveStrategy s{sve::parse_variant(strategy->variant), strategy->weight, strategy->gamma};
    *out = new sve_image{sve::sve_apply(image->value, mask->value, s)};
  });
}

sve_status sve_features_create(size_t rows, size_t dimension, const double* values, const int* labels,
                               const char* const* ids, sve_features** out) {
  return guard([&] {
    require(out && (rows == 0 || (values && labels)), "arguments must not be null");
    require(dimension > 0, "dimension must be positive");
    sve::FeatureTable table;
    table.descriptor = "external";
    table.dimension = dimension;
    for (size_t r = 0; r < rows; ++r) {
      sve::FeatureRow row;
      row.id = ids ? std::string(ids[r]) : "r" + std::to_string(r);
      row.label = labels[r];
      row.values.assign(values + r * dimension, values + (r + 1) * dimension);
      table.rows.push_back(std::move(row));
    }
    table.validate();
    *out = new sve_features{std::move(table)};
  });
}

sve_status sve_features_import(const char* path, sve_features** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new sve_features{sve::import_feature_table(path)};
  });
}

sve_status sve_features_export(const sve_features* table, const char* path) {
  return guard([&] {
    require(table && path, "table and path must not be null");
    sve::export_feature_table(table->value, path);
  });
}

size_t sve_features_rows(const sve_features* table) { return table ? table->value.rows.size() : 0; }

size_t sve_features_dimension(const sve_features* table) { return table ? table->value.dimension : 0; }

void sve_features_free(sve_features* table) { delete table; }

sve_status sve_extract_features(const sve_image* image, const char* config_json, double* values, size_t capacity,
                                size_t* dimension) {
  return guard([&] {
    require(image && dimension, "image and dimension must not be null");
    const auto cfg = config_from(config_json).descriptor_config();
    *dimension = cfg.dimension();
    if (!values) return;
    if (capacity < *dimension) sve::fail(sve::ErrorCode::kOutOfRange, "output buffer too small");
    const auto fv = sve::extract(image->value, cfg);
    std::copy(fv.values.begin(), fv.values.end(), values);
  });
}

sve_status sve_model_train(const sve_features* train, const char* config_json, sve_model** out) {
  return guard([&] {
    require(train && out, "train and out must not be null");
    *out = new sve_model{sve::fit(config_from(config_json).classifier_spec(), train->value)};
  });
}

sve_status sve_model_load(const char* path, sve_model** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new sve_model{sve::load_model(path)};
  });
}

sve_status sve_model_save(const sve_model* model, const char* path) {
  return guard([&] {
    require(model && path, "model and path must not be null");
    sve::save_model(model->value, path);
  });
}

sve_status sve_model_predict(const sve_model* model, const sve_features* table, sve_scores** out) {
  return guard([&] {
    require(model && table && out, "arguments must not be null");
    *out = new sve_scores{sve::predict_scores(model->value, table->value)};
  });
}

void sve_model_free(sve_model* model) { delete model; }

size_t sve_scores_rows(const sve_scores* scores) { return scores ? scores->value.rows() : 0; }

size_t sve_scores_classes(const sve_scores* scores) { return scores ? scores->value.num_classes : 0; }

const double* sve_scores_data(const sve_scores* scores) { return scores ? scores->value.values.data() : nullptr; }

sve_status sve_scores_load(const char* path, sve_scores** out) {
  return guard([&] {
    require(path && out, "path and out must not be null");
    *out = new sve_scores{sve::read_scores_csv(path)};
  });
}

sve_status sve_scores_save(const sve_scores* scores, const char* path) {
  return guard([&] {
    require(scores && path, "scores and path must not be null");
    sve::write_scores_csv(scores->value, path);
  });
}

void sve_scores_free(sve_scores* scores) { delete scores; }

sve_status sve_evaluate(const sve_scores* scores, char** report_json) {
  return guard([&] {
    require(scores && report_json, "arguments must not be null");
    *report_json = duplicate(sve::evaluate_scores(scores->value).to_json());
  });
}

sve_status sve_run_stage(const char* stage, const char* request_json, char** result_json) {
  return guard([&] {
    require(stage && result_json, "stage and result_json must not be null");
    nlohmann::json request = nlohmann::json::object();
    if (request_json) {
      try {
        request = nlohmann::json::parse(request_json);
      } catch (const nlohmann::json::exception& e) {
        sve::fail(sve::ErrorCode::kInvalidArgument, std::string("request is not valid JSON: ") + e.what());
      }
    }
    require(request.is_object(), "request must be a JSON object");
    static const std::set<std::string> keys = {"config_file", "config", "input",  "output", "model",
                                               "images",      "labels", "masks",  "dry_run", "resume"};
    for (const auto& [key, value] : request.items()) {
      if (!keys.count(key)) sve::fail(sve::ErrorCode::kInvalidArgument, "unknown request key '" + key + "'");
    }
    sve::RunConfig config;
    sve::StageOptions options;
    try {
      if (request.contains("config_file")) config.apply_json(sve::csv::read_text(request["config_file"].get<std::string>()));
      if (request.contains("config")) config.apply_json(request["config"].dump());
      auto path = [&](const char* key) {
        return request.contains(key) ? std::filesystem::path(request[key].get<std::string>()) : std::filesystem::path();
      };
      options.input = path("input");
      options.output = path("output");
      options.model = path("model");
      options.images = path("images");
      options.labels = path("labels");
      options.masks = path("masks");
      options.dry_run = request.value("dry_run", false);
      options.resume = request.value("resume", false);
    } catch (const nlohmann::json::exception& e) {
      sve::fail(sve::ErrorCode::kInvalidArgument, std::string("bad request value: ") + e.what());
    }
    *result_json = duplicate(sve::run_stage(stage, config, options).to_json());
  });
}

}  // extern "C"
