#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sve {

/// Per-sample class scores. Each row lies in [0,1] and sums to 1.
/// `ids` and `truth` travel with the scores so a score file is
/// self-contained for evaluation; both may be empty for anonymous scores.
struct ScoreMatrix {
  std::size_t num_classes = 0;
  std::vector<double> values;  // rows() x num_classes, row-major
  std::vector<std::string> ids;
  std::vector<int> truth;

  std::size_t rows() const noexcept { return num_classes ? values.size() / num_classes : 0; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values.data() + r * num_classes, num_classes};
  }
  std::span<double> row(std::size_t r) noexcept { return {values.data() + r * num_classes, num_classes}; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values[r * num_classes + c]; }

  /// Column c as a contiguous vector.
  std::vector<double> column(std::size_t c) const;

  /// Row sums within `tolerance` of 1, entries in [0,1], ids/truth sized to rows.
  void validate(double tolerance = 1e-9) const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

/// Argmax per row; exact ties go to the lowest class index.
std::vector<int> predict_labels(const ScoreMatrix& scores);

// CSV with header `id,label,s0,...,s{C-1}`; `label` is the true label.
void write_scores_csv(const ScoreMatrix& scores, const std::filesystem::path& path);
std::string scores_to_csv(const ScoreMatrix& scores);
ScoreMatrix read_scores_csv(const std::filesystem::path& path);

}  // namespace sve
