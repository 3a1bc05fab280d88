#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sve/scores.hpp"

namespace sve {

/// counts[i][j] = samples with true label i predicted as j.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::uint64_t> counts;  // row-major num_classes x num_classes

  std::uint64_t operator()(std::size_t truth, std::size_t predicted) const {
    return counts[truth * num_classes + predicted];
  }
  std::uint64_t total() const;
  std::uint64_t support(std::size_t c) const;    // row sum
  std::uint64_t predicted(std::size_t c) const;  // column sum

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// kDimensionMismatch for unequal lengths, kOutOfRange for a bad label.
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, std::size_t num_classes);

struct PerClassMetrics {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::uint64_t support = 0;
  /// Names of metrics whose denominator was zero (reported as 0).
  std::vector<std::string> degenerate;
};

struct AveragedMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// One-vs-rest metrics per class plus averages. Weighted averages weight
/// each class by support / total. Macro averages are plain means over the
/// active classes (support > 0 or predicted at least once).
struct ClassMetrics {
  std::vector<PerClassMetrics> per_class;
  AveragedMetrics weighted;
  AveragedMetrics macro;
  double overall_accuracy = 0.0;
  std::size_t active_classes = 0;
};

ClassMetrics class_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Points are (0,0), one point per distinct score threshold (descending,
/// tied scores moving together), then (1,1).
struct RocCurve {
  int positive_class = 0;
  std::vector<RocPoint> points;
  std::vector<double> thresholds;  // one per interior point
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// kDegenerate when truth is all-positive or all-negative.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& positive, int positive_class = 0);

struct MulticlassAuc {
  std::vector<std::optional<double>> per_class;  // nullopt: class absent from truth
  double macro = 0.0;
  double weighted = 0.0;
  std::vector<RocCurve> curves;                  // defined classes only
};

/// One-vs-rest AUC for every class present in truth. Needs >= 2 classes.
MulticlassAuc multiclass_auc(const ScoreMatrix& scores, const std::vector<int>& truth);

struct EvaluationReport {
  std::vector<std::string> class_names;
  ConfusionMatrix confusion;
  ClassMetrics metrics;
  MulticlassAuc auc;
  std::map<std::string, std::string> metadata;

  std::string to_json() const;
  static EvaluationReport from_json(std::string_view text);
};

/// kDimensionMismatch if the components disagree on the class count.
EvaluationReport build_report(const ConfusionMatrix& cm, const ClassMetrics& metrics, const MulticlassAuc& auc,
                              std::map<std::string, std::string> metadata,
                              std::vector<std::string> class_names = {});

/// Scores + truth -> full report (argmax labels, confusion, metrics, AUC).
EvaluationReport evaluate_scores(const ScoreMatrix& scores, std::map<std::string, std::string> metadata = {});

/// Writes report.json, confusion.csv and roc_class{c}.csv into `dir`;
/// returns the written paths.
std::vector<std::filesystem::path> write_report(const EvaluationReport& report, const std::filesystem::path& dir);
EvaluationReport load_report(const std::filesystem::path& path);

}  // namespace sve
