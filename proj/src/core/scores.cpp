#include "sve/scores.hpp"

#include <cmath>
#include <sstream>

#include "sve/csv.hpp"
#include "sve/dataset.hpp"
#include "sve/error.hpp"

namespace sve {

std::vector<double> ScoreMatrix::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = (*this)(r, c);
  return out;
}

void ScoreMatrix::validate(double tolerance) const {
  if (num_classes == 0) fail(ErrorCode::kInvalidArgument, "score matrix has no classes");
  if (values.size() % num_classes != 0) fail(ErrorCode::kDimensionMismatch, "ragged score matrix");
  if (!ids.empty() && ids.size() != rows()) fail(ErrorCode::kDimensionMismatch, "score ids do not match rows");
  if (!truth.empty() && truth.size() != rows()) fail(ErrorCode::kDimensionMismatch, "score labels do not match rows");
  for (std::size_t r = 0; r < rows(); ++r) {
    double sum = 0.0;
    for (double v : row(r)) {
      if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "non-finite score in row " + std::to_string(r));
      if (v < 0.0 || v > 1.0) fail(ErrorCode::kOutOfRange, "score outside [0,1] in row " + std::to_string(r));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      fail(ErrorCode::kOutOfRange, "scores in row " + std::to_string(r) + " sum to " + csv::format_double(sum));
    }
  }
}

std::vector<int> predict_labels(const ScoreMatrix& scores) {
  std::vector<int> labels(scores.rows());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto row = scores.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    labels[r] = static_cast<int>(best);
  }
  return labels;
}

std::string scores_to_csv(const ScoreMatrix& scores) {
  scores.validate();
  std::ostringstream out;
  out << "id,label";
  for (std::size_t c = 0; c < scores.num_classes; ++c) out << ",s" << c;
  out << '\n';
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    csv::Row fields{scores.ids.empty() ? "row" + std::to_string(r) : scores.ids[r],
                    scores.truth.empty() ? "" : std::to_string(scores.truth[r])};
    for (double v : scores.row(r)) fields.push_back(csv::format_double(v));
    csv::write_row(out, fields);
  }
  return out.str();
}

void write_scores_csv(const ScoreMatrix& scores, const std::filesystem::path& path) {
  csv::write_text(path, scores_to_csv(scores));
}

ScoreMatrix read_scores_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) fail(ErrorCode::kMalformed, "score file " + path.string() + " has no header");
  const auto& header = rows.front();
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    fail(ErrorCode::kMalformed, "score file header must be id,label,s0,...");
  }
  for (std::size_t j = 2; j < header.size(); ++j) {
    if (header[j] != "s" + std::to_string(j - 2)) fail(ErrorCode::kMalformed, "bad score column '" + header[j] + "'");
  }
  ScoreMatrix scores;
  scores.num_classes = header.size() - 2;
  bool any_missing_label = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) fail(ErrorCode::kMalformed, "ragged score row " + std::to_string(i + 1));
    scores.ids.push_back(row[0]);
    if (row[1].empty()) {
      any_missing_label = true;
      scores.truth.push_back(-1);
    } else {
      const auto label = csv::parse_int(row[1]);
      if (!label) fail(ErrorCode::kMalformed, "bad label in score row " + std::to_string(i + 1));
      if (*label < 0 || *label >= static_cast<long long>(scores.num_classes)) {
        fail(ErrorCode::kOutOfRange, "label " + std::to_string(*label) + " outside the score columns");
      }
      scores.truth.push_back(static_cast<int>(*label));
    }
    for (std::size_t j = 2; j < row.size(); ++j) {
      const auto v = csv::parse_double(row[j]);
      if (!v) fail(ErrorCode::kMalformed, "bad score '" + row[j] + "' in row " + std::to_string(i + 1));
      scores.values.push_back(*v);
    }
  }
  if (any_missing_label) scores.truth.clear();
  scores.validate();
  return scores;
}

}  // namespace sve
