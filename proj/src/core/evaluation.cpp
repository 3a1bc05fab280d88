#include "sve/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "sve/csv.hpp"
#include "sve/dataset.hpp"
#include "sve/error.hpp"

namespace sve {

namespace {

using nlohmann::json;

double ratio(std::uint64_t num, std::uint64_t den, const char* name, std::vector<std::string>& degenerate) {
  if (den == 0) {
    degenerate.emplace_back(name);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

json averaged_to_json(const AveragedMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"specificity", m.specificity},
          {"f1", m.f1},               {"accuracy", m.accuracy}};
}

AveragedMetrics averaged_from_json(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("specificity").get<double>(),
          j.at("f1").get<double>(), j.at("accuracy").get<double>()};
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::support(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < num_classes; ++j) s += (*this)(c, j);
  return s;
}

std::uint64_t ConfusionMatrix::predicted(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < num_classes; ++i) s += (*this)(i, c);
  return s;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, std::size_t num_classes) {
  if (truth.size() != predicted.size()) {
    fail(ErrorCode::kDimensionMismatch, "truth has " + std::to_string(truth.size()) + " labels, predictions " +
                                            std::to_string(predicted.size()));
  }
  if (num_classes == 0) fail(ErrorCode::kInvalidArgument, "class count must be positive");
  ConfusionMatrix cm{num_classes, std::vector<std::uint64_t>(num_classes * num_classes, 0)};
  const auto in_range = [&](int v) { return v >= 0 && static_cast<std::size_t>(v) < num_classes; };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!in_range(truth[i]) || !in_range(predicted[i])) {
      fail(ErrorCode::kOutOfRange, "label out of range at position " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(truth[i]) * num_classes + static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics out;
  const std::uint64_t total = cm.total();
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < cm.num_classes; ++c) {
    PerClassMetrics m;
    m.tp = cm(c, c);
    trace += m.tp;
    m.support = cm.support(c);
    m.fn = m.support - m.tp;
    m.fp = cm.predicted(c) - m.tp;
    m.tn = total - m.tp - m.fn - m.fp;
    m.precision = ratio(m.tp, m.tp + m.fp, "precision", m.degenerate);
    m.recall = ratio(m.tp, m.tp + m.fn, "recall", m.degenerate);
    m.specificity = ratio(m.tn, m.tn + m.fp, "specificity", m.degenerate);
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.degenerate.emplace_back("f1");
    }
    m.accuracy = ratio(m.tp + m.tn, total, "accuracy", m.degenerate);
    out.per_class.push_back(std::move(m));
  }
  std::vector<std::string> unused;
  out.overall_accuracy = ratio(trace, total, "overall_accuracy", unused);

  auto accumulate = [](AveragedMetrics& acc, const PerClassMetrics& m, double w) {
    acc.precision += w * m.precision;
    acc.recall += w * m.recall;
    acc.specificity += w * m.specificity;
    acc.f1 += w * m.f1;
    acc.accuracy += w * m.accuracy;
  };
  for (std::size_t c = 0; c < cm.num_classes; ++c) {
    const auto& m = out.per_class[c];
    if (total > 0) accumulate(out.weighted, m, static_cast<double>(m.support) / static_cast<double>(total));
    if (m.support > 0 || cm.predicted(c) > 0) ++out.active_classes;
  }
  if (out.active_classes > 0) {
    const double w = 1.0 / static_cast<double>(out.active_classes);
    for (std::size_t c = 0; c < cm.num_classes; ++c) {
      if (out.per_class[c].support > 0 || cm.predicted(c) > 0) accumulate(out.macro, out.per_class[c], w);
    }
  }
  return out;
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& positive, int positive_class) {
  if (scores.size() != positive.size()) fail(ErrorCode::kDimensionMismatch, "scores and truth differ in length");
  RocCurve curve;
  curve.positive_class = positive_class;
  for (bool p : positive) (p ? curve.positives : curve.negatives)++;
  if (curve.positives == 0 || curve.negatives == 0) {
    fail(ErrorCode::kDegenerate, "ROC needs at least one positive and one negative sample");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto P = static_cast<double>(curve.positives), N = static_cast<double>(curve.negatives);
  curve.points.push_back({0.0, 0.0});
  // Twice the area times P*N, accumulated exactly in integers.
  std::uint64_t area2 = 0;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    std::uint64_t tp_next = tp, fp_next = fp;
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (positive[order[i]] ? tp_next : fp_next)++;
    area2 += (fp_next - fp) * (tp_next + tp);
    tp = tp_next;
    fp = fp_next;
    curve.thresholds.push_back(threshold);
    curve.points.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  curve.points.push_back({1.0, 1.0});
  curve.auc = static_cast<double>(area2) / (2.0 * P * N);
  return curve;
}

MulticlassAuc multiclass_auc(const ScoreMatrix& scores, const std::vector<int>& truth) {
  if (truth.size() != scores.rows()) fail(ErrorCode::kDimensionMismatch, "truth length differs from score rows");
  std::vector<std::size_t> support(scores.num_classes, 0);
  for (int y : truth) {
    if (y < 0 || static_cast<std::size_t>(y) >= scores.num_classes) fail(ErrorCode::kOutOfRange, "truth label out of range");
    ++support[static_cast<std::size_t>(y)];
  }
  const auto present = std::count_if(support.begin(), support.end(), [](std::size_t s) { return s > 0; });
  if (present < 2) fail(ErrorCode::kDegenerate, "multiclass AUC needs at least two classes present in truth");

  MulticlassAuc out;
  out.per_class.assign(scores.num_classes, std::nullopt);
  double weighted = 0.0, macro = 0.0;
  for (std::size_t c = 0; c < scores.num_classes; ++c) {
    if (!support[c]) continue;
    std::vector<bool> positive(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) positive[i] = truth[i] == static_cast<int>(c);
    auto curve = roc_curve(scores.column(c), positive, static_cast<int>(c));
    out.per_class[c] = curve.auc;
    macro += curve.auc;
    weighted += curve.auc * static_cast<double>(support[c]);
    out.curves.push_back(std::move(curve));
  }
  out.macro = macro / static_cast<double>(present);
  out.weighted = weighted / static_cast<double>(truth.size());
  return out;
}

EvaluationReport build_report(const ConfusionMatrix& cm, const ClassMetrics& metrics, const MulticlassAuc& auc,
                              std::map<std::string, std::string> metadata, std::vector<std::string> class_names) {
  if (metrics.per_class.size() != cm.num_classes || auc.per_class.size() != cm.num_classes) {
    fail(ErrorCode::kDimensionMismatch, "report components disagree on the class count");
  }
  if (class_names.empty()) {
    for (std::size_t c = 0; c < cm.num_classes; ++c) {
      class_names.push_back(c < stare_class_names().size() && cm.num_classes == kClassCount
                                ? stare_class_names()[c]
                                : "class" + std::to_string(c));
    }
  }
  if (class_names.size() != cm.num_classes) fail(ErrorCode::kDimensionMismatch, "class name count mismatch");
  return {std::move(class_names), cm, metrics, auc, std::move(metadata)};
}

EvaluationReport evaluate_scores(const ScoreMatrix& scores, std::map<std::string, std::string> metadata) {
  scores.validate();
  if (scores.truth.empty()) fail(ErrorCode::kInvalidArgument, "scores carry no true labels to evaluate against");
  const auto cm = confusion(scores.truth, predict_labels(scores), scores.num_classes);
  return build_report(cm, class_metrics(cm), multiclass_auc(scores, scores.truth), std::move(metadata));
}

std::string EvaluationReport::to_json() const {
  json per_class = json::array();
  for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
    const auto& m = metrics.per_class[c];
    per_class.push_back({{"class", c},
                         {"name", class_names[c]},
                         {"tp", m.tp},
                         {"fp", m.fp},
                         {"fn", m.fn},
                         {"tn", m.tn},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"specificity", m.specificity},
                         {"f1", m.f1},
                         {"accuracy", m.accuracy},
                         {"support", m.support},
                         {"degenerate", m.degenerate}});
  }
  json matrix = json::array();
  for (std::size_t i = 0; i < confusion.num_classes; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < confusion.num_classes; ++j) row.push_back(confusion(i, j));
    matrix.push_back(row);
  }
  json auc_per_class = json::array();
  for (const auto& a : auc.per_class) auc_per_class.push_back(a ? json(*a) : json(nullptr));
  json roc = json::object();
  for (const auto& curve : auc.curves) {
    json pts = json::array();
    for (const auto& p : curve.points) pts.push_back({p.fpr, p.tpr});
    roc[std::to_string(curve.positive_class)] = {{"points", pts}, {"thresholds", curve.thresholds},
                                                 {"positives", curve.positives}, {"negatives", curve.negatives},
                                                 {"auc", curve.auc}};
  }
  json doc = {{"format", "sve-report"},
              {"version", 1},
              {"class_names", class_names},
              {"confusion", matrix},
              {"per_class", per_class},
              {"weighted_avg", averaged_to_json(metrics.weighted)},
              {"macro_avg", averaged_to_json(metrics.macro)},
              {"active_classes", metrics.active_classes},
              {"overall_accuracy", metrics.overall_accuracy},
              {"auc", {{"per_class", auc_per_class}, {"macro", auc.macro}, {"weighted", auc.weighted}}},
              {"roc", roc},
              {"metadata", metadata}};
  return doc.dump(2) + "\n";
}

EvaluationReport EvaluationReport::from_json(std::string_view text) {
  EvaluationReport r;
  try {
    const auto doc = json::parse(text);
    if (doc.value("format", "") != "sve-report") fail(ErrorCode::kMalformed, "not an evaluation report");
    if (doc.at("version") != 1) fail(ErrorCode::kVersionMismatch, "unsupported report version");
    r.class_names = doc.at("class_names").get<std::vector<std::string>>();
    const auto& matrix = doc.at("confusion");
    r.confusion.num_classes = matrix.size();
    for (const auto& row : matrix) {
      if (row.size() != r.confusion.num_classes) fail(ErrorCode::kMalformed, "confusion matrix is not square");
      for (const auto& v : row) r.confusion.counts.push_back(v.get<std::uint64_t>());
    }
    for (const auto& j : doc.at("per_class")) {
      PerClassMetrics m;
      m.tp = j.at("tp");
      m.fp = j.at("fp");
      m.fn = j.at("fn");
      m.tn = j.at("tn");
      m.precision = j.at("precision");
      m.recall = j.at("recall");
      m.specificity = j.at("specificity");
      m.f1 = j.at("f1");
      m.accuracy = j.at("accuracy");
      m.support = j.at("support");
      m.degenerate = j.at("degenerate").get<std::vector<std::string>>();
      r.metrics.per_class.push_back(std::move(m));
    }
    r.metrics.weighted = averaged_from_json(doc.at("weighted_avg"));
    r.metrics.macro = averaged_from_json(doc.at("macro_avg"));
    r.metrics.active_classes = doc.at("active_classes");
    r.metrics.overall_accuracy = doc.at("overall_accuracy");
    for (const auto& a : doc.at("auc").at("per_class")) {
      r.auc.per_class.push_back(a.is_null() ? std::nullopt : std::optional<double>(a.get<double>()));
    }
    r.auc.macro = doc.at("auc").at("macro");
    r.auc.weighted = doc.at("auc").at("weighted");
    for (std::size_t c = 0; c < r.auc.per_class.size(); ++c) {
      const auto key = std::to_string(c);
      if (!doc.at("roc").contains(key)) continue;
      const auto& j = doc.at("roc").at(key);
      RocCurve curve;
      curve.positive_class = static_cast<int>(c);
      for (const auto& p : j.at("points")) curve.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      curve.thresholds = j.at("thresholds").get<std::vector<double>>();
      curve.positives = j.at("positives");
      curve.negatives = j.at("negatives");
      curve.auc = j.at("auc");
      r.auc.curves.push_back(std::move(curve));
    }
    r.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("corrupt report: ") + e.what());
  }
  if (r.metrics.per_class.size() != r.confusion.num_classes || r.auc.per_class.size() != r.confusion.num_classes ||
      r.class_names.size() != r.confusion.num_classes) {
    fail(ErrorCode::kMalformed, "report sections disagree on the class count");
  }
  return r;
}

std::vector<std::filesystem::path> write_report(const EvaluationReport& report, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  std::filesystem::create_directories(dir);
  const auto json_path = dir / "report.json";
  csv::write_text(json_path, report.to_json());
  written.push_back(json_path);

  std::ostringstream cm;
  cm << "true_label";
  for (std::size_t j = 0; j < report.confusion.num_classes; ++j) cm << ",pred_" << j;
  cm << '\n';
  for (std::size_t i = 0; i < report.confusion.num_classes; ++i) {
    cm << i;
    for (std::size_t j = 0; j < report.confusion.num_classes; ++j) cm << ',' << report.confusion(i, j);
    cm << '\n';
  }
  csv::write_text(dir / "confusion.csv", cm.str());
  written.push_back(dir / "confusion.csv");

  for (const auto& curve : report.auc.curves) {
    std::ostringstream roc;
    roc << "fpr,tpr\n";
    for (const auto& p : curve.points) roc << csv::format_double(p.fpr) << ',' << csv::format_double(p.tpr) << '\n';
    const auto path = dir / ("roc_class" + std::to_string(curve.positive_class) + ".csv");
    csv::write_text(path, roc.str());
    written.push_back(path);
  }
  return written;
}

EvaluationReport load_report(const std::filesystem::path& path) {
  return EvaluationReport::from_json(csv::read_text(path));
}

}  // namespace sve
