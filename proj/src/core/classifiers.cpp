#include "sve/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "json.hpp"
#include "sve/csv.hpp"
#include "sve/error.hpp"
#include "sve/parallel.hpp"
#include "sve/random.hpp"

namespace sve {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxLdaDimension = 4096;
constexpr double kFiniteDifferenceStep = 1e-5;

// Dense N x D copy of a table's features.
struct Design {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x;
  std::vector<int> y;

  const double* row(std::size_t i) const { return x.data() + i * d; }
};

Design make_design(const FeatureTable& table) {
  Design m;
  m.n = table.rows.size();
  m.d = table.dimension;
  m.x.reserve(m.n * m.d);
  for (const auto& r : table.rows) {
    if (r.values.size() != m.d) fail(ErrorCode::kDimensionMismatch, "row '" + r.id + "' has the wrong dimension");
    for (double v : r.values) {
      if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "row '" + r.id + "' contains a non-finite feature");
      m.x.push_back(v);
    }
    m.y.push_back(r.label);
  }
  return m;
}

Design subset(const Design& all, std::span<const std::size_t> idx) {
  Design m;
  m.n = idx.size();
  m.d = all.d;
  m.x.reserve(m.n * m.d);
  for (auto i : idx) {
    m.x.insert(m.x.end(), all.row(i), all.row(i) + all.d);
    m.y.push_back(all.y[i]);
  }
  return m;
}

void softmax_inplace(std::span<double> z) {
  const double hi = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// ---- gradient-descent networks (logreg = no hidden layer) -----------------

std::vector<DenseLayer> init_layers(const ClassifierSpec& spec, std::size_t dimension) {
  std::vector<int> widths = {static_cast<int>(dimension)};
  if (spec.kind == ClassifierKind::kMlp) widths.push_back(spec.hidden_units);
  widths.push_back(spec.num_classes);
  Rng rng(derive_seed(RngSeed{spec.seed}, "init"));
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.inputs = widths[l];
    layer.outputs = widths[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.inputs) * layer.outputs, 0.0);
    layer.bias.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    if (!spec.zero_init) {
      const double limit = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
      for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

double layer_l2(const ClassifierSpec& spec) {
  return spec.kind == ClassifierKind::kLogreg ? spec.l2 : spec.mlp_l2;
}

// Forward pass: activations[l] is the input to layer l; returns logits.
std::vector<std::vector<double>> forward(const std::vector<DenseLayer>& layers, const double* x, std::size_t n) {
  std::vector<std::vector<double>> acts;
  acts.emplace_back(x, x + n * static_cast<std::size_t>(layers.front().inputs));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const auto& in = acts.back();
    std::vector<double> out(n * static_cast<std::size_t>(L.outputs));
    for (std::size_t i = 0; i < n; ++i) {
      const double* a = in.data() + i * static_cast<std::size_t>(L.inputs);
      for (int o = 0; o < L.outputs; ++o) {
        const double* w = L.weights.data() + static_cast<std::size_t>(o) * L.inputs;
        double z = L.bias[static_cast<std::size_t>(o)];
        for (int k = 0; k < L.inputs; ++k) z += w[k] * a[k];
        const bool hidden = l + 1 < layers.size();
        out[i * static_cast<std::size_t>(L.outputs) + static_cast<std::size_t>(o)] = hidden ? std::max(z, 0.0) : z;
      }
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

// Mean cross-entropy plus 0.5 * l2 * ||W||^2; fills `grad` when non-null.
double objective(const std::vector<DenseLayer>& layers, const Design& data, double l2, std::vector<DenseLayer>* grad) {
  const std::size_t n = data.n;
  auto acts = forward(layers, data.x.data(), n);
  const auto C = static_cast<std::size_t>(layers.back().outputs);
  auto& logits = acts.back();
  double loss = 0.0;
  std::vector<double> delta(n * C);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> z(logits.data() + i * C, C);
    const double hi = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - hi);
    const double log_norm = hi + std::log(sum);
    const auto yi = static_cast<std::size_t>(data.y[i]);
    loss -= z[yi] - log_norm;
    for (std::size_t c = 0; c < C; ++c) {
      delta[i * C + c] = (std::exp(z[c] - log_norm) - (c == yi ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  loss /= static_cast<double>(n);
  double penalty = 0.0;
  for (const auto& L : layers)
    for (double w : L.weights) penalty += w * w;
  loss += 0.5 * l2 * penalty;
  if (!grad) return loss;

  *grad = layers;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& L = layers[l];
    auto& G = (*grad)[l];
    const auto in = static_cast<std::size_t>(L.inputs), out = static_cast<std::size_t>(L.outputs);
    const auto& a = acts[l];
    for (std::size_t o = 0; o < out; ++o) {
      double gb = 0.0;
      double* gw = G.weights.data() + o * in;
      const double* w = L.weights.data() + o * in;
      for (std::size_t k = 0; k < in; ++k) gw[k] = l2 * w[k];
      for (std::size_t i = 0; i < n; ++i) {
        const double d = delta[i * out + o];
        if (d == 0.0) continue;
        gb += d;
        const double* ai = a.data() + i * in;
        for (std::size_t k = 0; k < in; ++k) gw[k] += d * ai[k];
      }
      G.bias[o] = gb;
    }
    if (l == 0) break;
    std::vector<double> prev(n * in, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[i * out + o];
        if (d == 0.0) continue;
        const double* w = L.weights.data() + o * in;
        for (std::size_t k = 0; k < in; ++k) prev[i * in + k] += d * w[k];
      }
      for (std::size_t k = 0; k < in; ++k)
        if (a[i * in + k] <= 0.0) prev[i * in + k] = 0.0;  // ReLU derivative
    }
    delta = std::move(prev);
  }
  return loss;
}

void train_network(TrainedModel& model, const Design& data) {
  const auto& spec = model.spec;
  model.layers = init_layers(spec, data.d);
  const double l2 = layer_l2(spec);
  const bool full_batch = spec.batch_size <= 0 || static_cast<std::size_t>(spec.batch_size) >= data.n;
  Rng rng(derive_seed(RngSeed{spec.seed}, "batches"));
  std::vector<std::size_t> order(data.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<DenseLayer> grad;
  int stalled = 0;
  auto step = [&](const std::vector<DenseLayer>& g) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      auto& L = model.layers[l];
      for (std::size_t k = 0; k < L.weights.size(); ++k) L.weights[k] -= spec.learning_rate * g[l].weights[k];
      for (std::size_t k = 0; k < L.bias.size(); ++k) L.bias[k] -= spec.learning_rate * g[l].bias[k];
    }
  };
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    const double loss = objective(model.layers, data, l2, full_batch ? &grad : nullptr);
    if (!std::isfinite(loss)) fail(ErrorCode::kDegenerate, "training loss diverged at epoch " + std::to_string(epoch));
    if (!model.loss_trace.empty()) {
      stalled = model.loss_trace.back() - loss < spec.plateau_delta ? stalled + 1 : 0;
    }
    model.loss_trace.push_back(loss);
    model.epochs_run = epoch + 1;
    if (stalled >= spec.plateau_patience) break;
    if (full_batch) {
      step(grad);
      continue;
    }
    rng.shuffle(order);
    for (std::size_t start = 0; start < data.n; start += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t stop = std::min(data.n, start + static_cast<std::size_t>(spec.batch_size));
      const Design batch = subset(data, std::span(order).subspan(start, stop - start));
      objective(model.layers, batch, l2, &grad);
      step(grad);
    }
  }
}

// ---- LDA ------------------------------------------------------------------

// In-place Cholesky of a symmetric positive definite d x d matrix (lower
// triangle). Returns false if a pivot is not positive; pivots lost in
// rounding noise relative to the largest diagonal entry count as zero.
bool cholesky(std::vector<double>& a, std::size_t d) {
  double scale = 0.0;
  for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(a[j * d + j]));
  const double tiny = scale * static_cast<double>(d) * std::numeric_limits<double>::epsilon();
  for (std::size_t j = 0; j < d; ++j) {
    double s = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) s -= a[j * d + k] * a[j * d + k];
    if (!(s > tiny) || !std::isfinite(s)) return false;
    const double l = std::sqrt(s);
    a[j * d + j] = l;
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) t -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = t / l;
    }
  }
  return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t d, std::vector<double> b) {
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l[i * d + k] * b[k];
    b[i] /= l[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    for (std::size_t k = i + 1; k < d; ++k) b[i] -= l[k * d + i] * b[k];
    b[i] /= l[i * d + i];
  }
  return b;
}

void train_lda(TrainedModel& model, const Design& data) {
  const std::size_t d = data.d;
  if (d > kMaxLdaDimension) {
    fail(ErrorCode::kInvalidArgument, "LDA supports at most " + std::to_string(kMaxLdaDimension) + " features");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(model.spec.num_classes), 0);
  for (int y : data.y) ++counts[static_cast<std::size_t>(y)];
  std::vector<std::vector<double>> means(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c]) {
      model.lda_classes.push_back(static_cast<int>(c));
      means[c].assign(d, 0.0);
    }
  }
  for (std::size_t i = 0; i < data.n; ++i) {
    auto& m = means[static_cast<std::size_t>(data.y[i])];
    for (std::size_t k = 0; k < d; ++k) m[k] += data.row(i)[k];
  }
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (double& v : means[c]) v /= static_cast<double>(counts[c]);

  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centred(d);
  for (std::size_t i = 0; i < data.n; ++i) {
    const auto& m = means[static_cast<std::size_t>(data.y[i])];
    for (std::size_t k = 0; k < d; ++k) centred[k] = data.row(i)[k] - m[k];
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c <= r; ++c) cov[r * d + c] += centred[r] * centred[c];
  }
  const std::size_t classes = model.lda_classes.size();
  const double denom = data.n > classes ? static_cast<double>(data.n - classes) : 1.0;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c <= r; ++c) {
      cov[r * d + c] /= denom;
      cov[c * d + r] = cov[r * d + c];
    }
    cov[r * d + r] += model.spec.ridge;
  }
  if (!cholesky(cov, d)) {
    fail(ErrorCode::kDegenerate, "pooled covariance is not positive definite even after ridge " +
                                     csv::format_double(model.spec.ridge));
  }
  for (int c : model.lda_classes) {
    const auto& m = means[static_cast<std::size_t>(c)];
    auto coef = cholesky_solve(cov, d, m);
    double quad = 0.0;
    for (std::size_t k = 0; k < d; ++k) quad += m[k] * coef[k];
    const double prior = static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(data.n);
    model.lda_intercept.push_back(-0.5 * quad + std::log(prior));
    model.lda_coef.push_back(std::move(coef));
  }
}

// ---- KNN ------------------------------------------------------------------

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

bool neighbor_before(const Neighbor& a, const Neighbor& b) {
  return a.squared_distance < b.squared_distance ||
         (a.squared_distance == b.squared_distance && a.index < b.index);
}

void score_row(const TrainedModel& model, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  switch (model.spec.kind) {
    case ClassifierKind::kKnn: {
      const auto nn = knn_neighbors(model, x);
      for (const auto& n : nn) out[static_cast<std::size_t>(model.knn_labels[n.index])] += 1.0;
      for (double& v : out) v /= static_cast<double>(nn.size());
      return;
    }
    case ClassifierKind::kMlp:
    case ClassifierKind::kLogreg: {
      const auto acts = forward(model.layers, x.data(), 1);
      std::copy(acts.back().begin(), acts.back().end(), out.begin());
      softmax_inplace(out);
      return;
    }
    case ClassifierKind::kLda: {
      std::vector<double> z(model.lda_classes.size());
      for (std::size_t j = 0; j < z.size(); ++j) {
        double v = model.lda_intercept[j];
        for (std::size_t k = 0; k < x.size(); ++k) v += model.lda_coef[j][k] * x[k];
        z[j] = v;
      }
      softmax_inplace(z);
      for (std::size_t j = 0; j < z.size(); ++j) out[static_cast<std::size_t>(model.lda_classes[j])] = z[j];
      return;
    }
  }
}

// ---- serialization ----------------------------------------------------------

json spec_to_json(const ClassifierSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"num_classes", s.num_classes},
          {"k", s.k},
          {"hidden_units", s.hidden_units},
          {"learning_rate", s.learning_rate},
          {"epochs", s.epochs},
          {"batch_size", s.batch_size},
          {"l2", s.l2},
          {"mlp_l2", s.mlp_l2},
          {"plateau_delta", s.plateau_delta},
          {"plateau_patience", s.plateau_patience},
          {"zero_init", s.zero_init},
          {"ridge", s.ridge},
          {"seed", s.seed}};
}

ClassifierSpec spec_from_json(const json& j) {
  ClassifierSpec s;
  s.kind = parse_classifier_kind(j.at("kind").get<std::string>());
  s.num_classes = j.at("num_classes").get<int>();
  s.k = j.at("k").get<int>();
  s.hidden_units = j.at("hidden_units").get<int>();
  s.learning_rate = j.at("learning_rate").get<double>();
  s.epochs = j.at("epochs").get<int>();
  s.batch_size = j.at("batch_size").get<int>();
  s.l2 = j.at("l2").get<double>();
  s.mlp_l2 = j.at("mlp_l2").get<double>();
  s.plateau_delta = j.at("plateau_delta").get<double>();
  s.plateau_patience = j.at("plateau_patience").get<int>();
  s.zero_init = j.at("zero_init").get<bool>();
  s.ridge = j.at("ridge").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kKnn: return "knn";
    case ClassifierKind::kMlp: return "mlp";
    case ClassifierKind::kLogreg: return "logreg";
    case ClassifierKind::kLda: return "lda";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (auto k : {ClassifierKind::kKnn, ClassifierKind::kMlp, ClassifierKind::kLogreg, ClassifierKind::kLda}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorCode::kInvalidArgument, "unknown classifier '" + std::string(name) + "' (expected knn|mlp|logreg|lda)");
}

void ClassifierSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::kInvalidArgument, what);
  };
  require(num_classes >= 2 && num_classes <= 1024, "num_classes must be in [2, 1024]");
  require(k >= 1, "k must be >= 1");
  require(hidden_units >= 1, "hidden_units must be >= 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be > 0");
  require(epochs >= 1, "epochs must be >= 1");
  require(batch_size >= 0, "batch_size must be >= 0");
  require(l2 >= 0.0 && mlp_l2 >= 0.0, "l2 penalties must be >= 0");
  require(plateau_delta >= 0.0 && plateau_patience >= 1, "plateau settings must be non-negative");
  require(ridge >= 0.0 && std::isfinite(ridge), "ridge must be >= 0");
}

TrainedModel fit(const ClassifierSpec& spec, const FeatureTable& train) {
  spec.validate();
  if (train.rows.empty()) fail(ErrorCode::kInvalidArgument, "cannot fit on an empty training table");
  if (train.dimension == 0) fail(ErrorCode::kInvalidArgument, "cannot fit on zero-dimensional features");
  const Design data = make_design(train);
  for (int y : data.y) {
    if (y < 0 || y >= spec.num_classes) {
      fail(ErrorCode::kOutOfRange, "training label " + std::to_string(y) + " outside the model's classes");
    }
  }
  TrainedModel model;
  model.spec = spec;
  model.dimension = data.d;
  switch (spec.kind) {
    case ClassifierKind::kKnn:
      for (std::size_t i = 0; i < data.n; ++i) model.knn_points.emplace_back(data.row(i), data.row(i) + data.d);
      model.knn_labels = data.y;
      break;
    case ClassifierKind::kMlp:
    case ClassifierKind::kLogreg:
      train_network(model, data);
      break;
    case ClassifierKind::kLda:
      train_lda(model, data);
      break;
  }
  return model;
}

std::vector<Neighbor> knn_neighbors(const TrainedModel& model, std::span<const double> query) {
  const std::size_t k = std::min(static_cast<std::size_t>(model.spec.k), model.knn_points.size());
  // Max-heap on (distance, index): the top is the worst of the current best k.
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(&neighbor_before)> heap(&neighbor_before);
  for (std::size_t i = 0; i < model.knn_points.size(); ++i) {
    const Neighbor cand{i, squared_distance(query, model.knn_points[i])};
    if (heap.size() < k) {
      heap.push(cand);
    } else if (neighbor_before(cand, heap.top())) {
      heap.pop();
      heap.push(cand);
    }
  }
  std::vector<Neighbor> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

ScoreMatrix predict_scores(const TrainedModel& model, const FeatureTable& table, unsigned jobs) {
  if (table.dimension != model.dimension) {
    fail(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(model.dimension) + " features, table has " +
                                            std::to_string(table.dimension));
  }
  ScoreMatrix scores;
  scores.num_classes = static_cast<std::size_t>(model.spec.num_classes);
  scores.values.assign(table.rows.size() * scores.num_classes, 0.0);
  for (const auto& r : table.rows) {
    scores.ids.push_back(r.id);
    scores.truth.push_back(r.label);
  }
  parallel_for(table.rows.size(), jobs, [&](std::size_t i) {
    const auto& values = table.rows[i].values;
    if (values.size() != model.dimension) fail(ErrorCode::kDimensionMismatch, "ragged feature row");
    score_row(model, values, scores.row(i));
  });
  return scores;
}

std::vector<int> predict_labels(const TrainedModel& model, const FeatureTable& table) {
  if (model.spec.kind != ClassifierKind::kKnn) return predict_labels(predict_scores(model, table));
  if (table.dimension != model.dimension) fail(ErrorCode::kDimensionMismatch, "feature dimension mismatch");
  std::vector<int> labels;
  const auto C = static_cast<std::size_t>(model.spec.num_classes);
  for (const auto& r : table.rows) {
    std::vector<int> votes(C, 0);
    std::vector<double> distance(C, 0.0);
    for (const auto& n : knn_neighbors(model, r.values)) {
      const auto c = static_cast<std::size_t>(model.knn_labels[n.index]);
      ++votes[c];
      distance[c] += std::sqrt(n.squared_distance);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c) {
      if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && distance[c] < distance[best])) best = c;
    }
    labels.push_back(static_cast<int>(best));
  }
  return labels;
}

GradientCheckResult gradient_check(const ClassifierSpec& spec, const FeatureTable& table) {
  spec.validate();
  if (spec.kind != ClassifierKind::kMlp && spec.kind != ClassifierKind::kLogreg) {
    fail(ErrorCode::kInvalidArgument, "gradient check applies to mlp and logreg only");
  }
  if (table.rows.empty() || table.rows.size() > 20 || table.dimension == 0 || table.dimension > 10) {
    fail(ErrorCode::kInvalidArgument, "gradient check needs 1-20 samples with 1-10 features");
  }
  const Design data = make_design(table);
  auto layers = init_layers(spec, data.d);
  const double l2 = layer_l2(spec);
  std::vector<DenseLayer> grad;
  GradientCheckResult result;
  result.loss = objective(layers, data, l2, &grad);
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + kFiniteDifferenceStep;
    const double up = objective(layers, data, l2, nullptr);
    param = saved - kFiniteDifferenceStep;
    const double down = objective(layers, data, l2, nullptr);
    param = saved;
    const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic - numeric) / scale);
    ++result.parameters;
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t k = 0; k < layers[l].weights.size(); ++k) check(layers[l].weights[k], grad[l].weights[k]);
    for (std::size_t k = 0; k < layers[l].bias.size(); ++k) check(layers[l].bias[k], grad[l].bias[k]);
  }
  return result;
}

std::string model_to_json(const TrainedModel& model) {
  json doc = {{"format", "sve-model"},
              {"version", kModelFormatVersion},
              {"spec", spec_to_json(model.spec)},
              {"dimension", model.dimension},
              {"training", {{"epochs_run", model.epochs_run}, {"loss_trace", model.loss_trace}}}};
  switch (model.spec.kind) {
    case ClassifierKind::kKnn:
      doc["knn"] = {{"labels", model.knn_labels}, {"points", model.knn_points}};
      break;
    case ClassifierKind::kMlp:
    case ClassifierKind::kLogreg: {
      json layers = json::array();
      for (const auto& L : model.layers) {
        layers.push_back({{"inputs", L.inputs}, {"outputs", L.outputs}, {"weights", L.weights}, {"bias", L.bias}});
      }
      doc["layers"] = layers;
      break;
    }
    case ClassifierKind::kLda:
      doc["lda"] = {{"classes", model.lda_classes}, {"coef", model.lda_coef}, {"intercept", model.lda_intercept}};
      break;
  }
  return doc.dump(1) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  TrainedModel model;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("corrupt model file: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "sve-model") fail(ErrorCode::kMalformed, "not a model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorCode::kVersionMismatch, "model format version " + std::to_string(version) + " is not supported (expected " +
                                            std::to_string(kModelFormatVersion) + ")");
    }
    model.spec = spec_from_json(doc.at("spec"));
    model.spec.validate();
    model.dimension = doc.at("dimension").get<std::size_t>();
    model.epochs_run = doc.at("training").at("epochs_run").get<int>();
    model.loss_trace = doc.at("training").at("loss_trace").get<std::vector<double>>();
    const auto C = model.spec.num_classes;
    switch (model.spec.kind) {
      case ClassifierKind::kKnn:
        model.knn_labels = doc.at("knn").at("labels").get<std::vector<int>>();
        model.knn_points = doc.at("knn").at("points").get<std::vector<std::vector<double>>>();
        if (model.knn_labels.size() != model.knn_points.size() || model.knn_points.empty()) {
          fail(ErrorCode::kMalformed, "inconsistent knn payload");
        }
        for (const auto& p : model.knn_points)
          if (p.size() != model.dimension) fail(ErrorCode::kMalformed, "knn point has the wrong dimension");
        for (int y : model.knn_labels)
          if (y < 0 || y >= C) fail(ErrorCode::kMalformed, "knn label out of range");
        break;
      case ClassifierKind::kMlp:
      case ClassifierKind::kLogreg: {
        int inputs = static_cast<int>(model.dimension);
        for (const auto& j : doc.at("layers")) {
          DenseLayer L;
          L.inputs = j.at("inputs").get<int>();
          L.outputs = j.at("outputs").get<int>();
          L.weights = j.at("weights").get<std::vector<double>>();
          L.bias = j.at("bias").get<std::vector<double>>();
          if (L.inputs != inputs || L.weights.size() != static_cast<std::size_t>(L.inputs) * L.outputs ||
              L.bias.size() != static_cast<std::size_t>(L.outputs)) {
            fail(ErrorCode::kMalformed, "inconsistent layer shapes");
          }
          inputs = L.outputs;
          model.layers.push_back(std::move(L));
        }
        const std::size_t expected = model.spec.kind == ClassifierKind::kMlp ? 2 : 1;
        if (model.layers.size() != expected || inputs != C) fail(ErrorCode::kMalformed, "unexpected network layout");
        break;
      }
      case ClassifierKind::kLda:
        model.lda_classes = doc.at("lda").at("classes").get<std::vector<int>>();
        model.lda_coef = doc.at("lda").at("coef").get<std::vector<std::vector<double>>>();
        model.lda_intercept = doc.at("lda").at("intercept").get<std::vector<double>>();
        if (model.lda_classes.empty() || model.lda_coef.size() != model.lda_classes.size() ||
            model.lda_intercept.size() != model.lda_classes.size()) {
          fail(ErrorCode::kMalformed, "inconsistent lda payload");
        }
        for (const auto& c : model.lda_coef)
          if (c.size() != model.dimension) fail(ErrorCode::kMalformed, "lda coefficient has the wrong dimension");
        for (int c : model.lda_classes)
          if (c < 0 || c >= C) fail(ErrorCode::kMalformed, "lda class out of range");
        break;
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("corrupt model file: ") + e.what());
  }
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  csv::write_text(path, model_to_json(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  return model_from_json(csv::read_text(path));
}

}  // namespace sve
