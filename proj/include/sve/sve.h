#ifndef SVE_SVE_H
#define SVE_SVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(SVE_BUILDING_LIBRARY)
#define SVE_API __attribute__((visibility("default")))
#else
#define SVE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sve_status {
  SVE_OK = 0,
  SVE_ERR_INVALID_ARGUMENT = 1,
  SVE_ERR_NOT_FOUND = 2,
  SVE_ERR_MALFORMED = 3,
  SVE_ERR_UNSUPPORTED = 4,
  SVE_ERR_DIMENSION_MISMATCH = 5,
  SVE_ERR_OUT_OF_RANGE = 6,
  SVE_ERR_DUPLICATE_ID = 7,
  SVE_ERR_NON_FINITE = 8,
  SVE_ERR_DEGENERATE = 9,
  SVE_ERR_VERSION_MISMATCH = 10,
  SVE_ERR_IO = 11,
  SVE_ERR_CLASS_MISMATCH = 12,
  SVE_ERR_INTERNAL = 13
} sve_status;

typedef struct sve_image sve_image;
typedef struct sve_mask sve_mask;
typedef struct sve_features sve_features;
typedef struct sve_model sve_model;
typedef struct sve_scores sve_scores;

SVE_API const char* sve_version(void);
/* Message of the last failure on the calling thread ("" if none). */
SVE_API const char* sve_last_error(void);
SVE_API const char* sve_status_name(sve_status status);
/* CLI exit code for a status: 0 ok, 2 usage, 3 input, 4 numeric. */
SVE_API int sve_exit_code(sve_status status);
/* Frees strings returned through char** out-parameters. */
SVE_API void sve_string_free(char* text);

/* Images: interleaved 8-bit RGB, row-major. */
SVE_API sve_status sve_image_create(uint32_t width, uint32_t height, const uint8_t* rgb, sve_image** out);
SVE_API sve_status sve_image_load(const char* path, sve_image** out);
SVE_API sve_status sve_image_save(const sve_image* image, const char* path);
SVE_API sve_status sve_image_size(const sve_image* image, uint32_t* width, uint32_t* height);
SVE_API const uint8_t* sve_image_data(const sve_image* image);
SVE_API void sve_image_free(sve_image* image);

/* Masks: one byte per pixel, 0 or 1. Files may hold 0/1 or 0/255 gray. */
SVE_API sve_status sve_mask_create(uint32_t width, uint32_t height, const uint8_t* values, sve_mask** out);
SVE_API sve_status sve_mask_load(const char* path, sve_mask** out);
SVE_API void sve_mask_free(sve_mask* mask);

typedef struct sve_strategy {
  const char* variant; /* vessel-only, weighted-origin, weighted-background, gamma-origin, heatmap-origin */
  double weight;
  double gamma;
} sve_strategy;

SVE_API sve_status sve_enhance(const sve_image* image, const sve_mask* mask, const sve_strategy* strategy,
                               sve_image** out);

/* Feature tables. `ids` may be NULL, giving ids r0, r1, ... */
SVE_API sve_status sve_features_create(size_t rows, size_t dimension, const double* values, const int* labels,
                                       const char* const* ids, sve_features** out);
SVE_API sve_status sve_features_import(const char* path, sve_features** out);
SVE_API sve_status sve_features_export(const sve_features* table, const char* path);
SVE_API size_t sve_features_rows(const sve_features* table);
SVE_API size_t sve_features_dimension(const sve_features* table);
SVE_API void sve_features_free(sve_features* table);

/* Descriptor for one image. `config_json` holds run-config descriptor keys
   (descriptor, image_size, lbp_*, hog_*) or is NULL for defaults. When
   `values` is NULL only the dimension is reported. */
SVE_API sve_status sve_extract_features(const sve_image* image, const char* config_json, double* values,
                                        size_t capacity, size_t* dimension);

/* Models. `config_json` holds run-config classifier keys or is NULL. */
SVE_API sve_status sve_model_train(const sve_features* train, const char* config_json, sve_model** out);
SVE_API sve_status sve_model_load(const char* path, sve_model** out);
SVE_API sve_status sve_model_save(const sve_model* model, const char* path);
SVE_API sve_status sve_model_predict(const sve_model* model, const sve_features* table, sve_scores** out);
SVE_API void sve_model_free(sve_model* model);

SVE_API size_t sve_scores_rows(const sve_scores* scores);
SVE_API size_t sve_scores_classes(const sve_scores* scores);
/* Row-major rows x classes. */
SVE_API const double* sve_scores_data(const sve_scores* scores);
SVE_API sve_status sve_scores_load(const char* path, sve_scores** out);
SVE_API sve_status sve_scores_save(const sve_scores* scores, const char* path);
SVE_API void sve_scores_free(sve_scores* scores);

/* Full report JSON for scores carrying true labels. */
SVE_API sve_status sve_evaluate(const sve_scores* scores, char** report_json);

/* Runs a pipeline stage. `request_json` is an object with optional keys
   config_file, config (overrides), input, output, model, images, labels,
   masks, dry_run, resume. On success `result_json` lists artifacts,
   warnings, the dry-run plan, resumed stages and stage logs. */
SVE_API sve_status sve_run_stage(const char* stage, const char* request_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif
