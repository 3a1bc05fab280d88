#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sve/features.hpp"
#include "sve/scores.hpp"

namespace sve {

enum class ClassifierKind { kKnn, kMlp, kLogreg, kLda };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kKnn;
  int num_classes = kClassCount;

  // knn
  int k = 5;

  // mlp / logreg, trained by gradient descent on softmax cross-entropy
  int hidden_units = 256;
  double learning_rate = 0.01;
  int epochs = 500;
  int batch_size = 0;  // 0 selects full-batch descent
  double l2 = 1e-4;    // applied to logreg weights; mlp uses mlp_l2
  double mlp_l2 = 0.0;
  double plateau_delta = 1e-7;
  int plateau_patience = 20;
  bool zero_init = false;

  // lda
  double ridge = 1e-6;

  std::uint64_t seed = 0;

  void validate() const;
};

/// Fully connected layer; weights are out x in, row-major.
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct TrainedModel {
  ClassifierSpec spec;
  std::size_t dimension = 0;

  // knn: the stored training set
  std::vector<std::vector<double>> knn_points;
  std::vector<int> knn_labels;

  // mlp: {hidden (ReLU), output}; logreg: {output}
  std::vector<DenseLayer> layers;

  // lda: one linear discriminant per class present in training
  std::vector<int> lda_classes;
  std::vector<std::vector<double>> lda_coef;
  std::vector<double> lda_intercept;

  std::vector<double> loss_trace;
  int epochs_run = 0;
};

/// Trains a model. Deterministic for a given spec (including seed).
/// Errors: kInvalidArgument for an empty table or zero dimension,
/// kNonFinite for non-finite features, kDegenerate when the LDA covariance
/// is not positive definite even after the ridge.
TrainedModel fit(const ClassifierSpec& spec, const FeatureTable& train);

/// Class scores for every row; kDimensionMismatch if the table dimension
/// differs from the model's.
ScoreMatrix predict_scores(const TrainedModel& model, const FeatureTable& table, unsigned jobs = 1);

/// Hard labels. KNN breaks vote ties by the smaller summed neighbour
/// distance, then the lower class index; other kinds take the score argmax.
std::vector<int> predict_labels(const TrainedModel& model, const FeatureTable& table);

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

/// The k nearest stored points to `query`, ordered by (distance, index).
std::vector<Neighbor> knn_neighbors(const TrainedModel& model, std::span<const double> query);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  double loss = 0.0;  // objective at the checked parameters
  std::size_t parameters = 0;
};

/// Compares the analytic gradient of the training objective at the initial
/// parameters against central differences (h = 1e-5). mlp/logreg only;
/// at most 20 samples and 10 features.
GradientCheckResult gradient_check(const ClassifierSpec& spec, const FeatureTable& table);

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
/// kNotFound, kMalformed for a corrupt/truncated file, kVersionMismatch.
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace sve
