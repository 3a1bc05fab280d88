#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sve/classifiers.hpp"
#include "sve/csv.hpp"
#include "sve/error.hpp"
#include "test_support.hpp"

using namespace sve;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

FeatureTable make_table(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  FeatureTable t;
  t.descriptor = "external";
  t.dimension = x.empty() ? 0 : x[0].size();
  for (std::size_t i = 0; i < x.size(); ++i) t.rows.push_back({"r" + std::to_string(i), y[i], x[i]});
  return t;
}

// Isotropic Gaussian blobs with means at +/- `offset` along each axis pair.
FeatureTable blobs(int classes, int per_class, int dim, double offset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      std::vector<double> v(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) v[static_cast<std::size_t>(j)] = n(rng) + (j % classes == c ? offset : -offset / 2);
      x.push_back(v);
      y.push_back(c);
    }
  }
  return make_table(x, y);
}

double accuracy(const std::vector<int>& pred, const FeatureTable& t) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == t.rows[i].label;
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

}  // namespace

TEST(Knn, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng() % 60, d = 1 + rng() % 6;
    std::uniform_int_distribution<int> coarse(-2, 2);  // small grid forces distance ties
    std::vector<std::vector<double>> x(n, std::vector<double>(d));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& v : x[i]) v = coarse(rng);
      y[i] = static_cast<int>(rng() % 4);
    }
    ClassifierSpec spec;
    spec.k = 1 + static_cast<int>(rng() % 9);
    const auto model = fit(spec, make_table(x, y));
    std::vector<std::vector<double>> q(10, std::vector<double>(d));
    for (auto& row : q)
      for (double& v : row) v = coarse(rng);
    const auto queries = make_table(q, std::vector<int>(10, 0));
    const auto scores = predict_scores(model, queries);
    const auto labels = predict_labels(model, queries);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto oracle = support::knn_oracle(x, q[i], static_cast<std::size_t>(spec.k));
      const auto got = knn_neighbors(model, q[i]);
      ASSERT_EQ(got.size(), oracle.index.size());
      for (std::size_t j = 0; j < got.size(); ++j) {
        EXPECT_EQ(got[j].index, oracle.index[j]);
        EXPECT_EQ(got[j].squared_distance, oracle.squared[j]);
      }
      EXPECT_EQ(labels[i], support::knn_vote_oracle(oracle, y, kClassCount));
      for (int c = 0; c < kClassCount; ++c) {
        double votes = 0;
        for (auto idx : oracle.index) votes += y[idx] == c;
        EXPECT_DOUBLE_EQ(scores(i, static_cast<std::size_t>(c)), votes / static_cast<double>(oracle.index.size()));
      }
    }
  }
}

TEST(Knn, SmallTrainingSetAndSelfRecall) {
  const auto t = make_table({{0, 0}, {1, 0}, {5, 5}}, {0, 0, 1});
  ClassifierSpec spec;
  spec.k = 10;
  const auto model = fit(spec, t);
  EXPECT_EQ(knn_neighbors(model, std::vector<double>{0, 0}).size(), 3u);
  spec.k = 1;
  EXPECT_EQ(predict_labels(fit(spec, t), t), (std::vector<int>{0, 0, 1}));
}

TEST(Knn, VoteTieGoesToCloserClass) {
  // Two neighbours each of class 3 and 1; class 1's are closer.
  const auto t = make_table({{1}, {-1}, {2}, {-2}}, {1, 1, 3, 3});
  ClassifierSpec spec;
  spec.k = 4;
  const auto model = fit(spec, t);
  const auto q = make_table({{0}}, {0});
  EXPECT_EQ(predict_labels(model, q)[0], 1);
  const auto q2 = make_table({{10}}, {0});
  // Distances 9+11 vs 8+12: equal sums, so the lower class wins.
  EXPECT_EQ(predict_labels(model, q2)[0], 1);
}

TEST(Logreg, SeparatesBlobsAndLossFalls) {
  const auto train = blobs(3, 40, 4, 3.0, 2);
  const auto test = blobs(3, 40, 4, 3.0, 3);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::kLogreg;
  spec.learning_rate = 0.1;
  spec.epochs = 300;
  const auto model = fit(spec, train);
  EXPECT_GE(accuracy(predict_labels(model, test), test), 0.95);
  ASSERT_EQ(model.loss_trace.size(), static_cast<std::size_t>(model.epochs_run));
  for (std::size_t e = 1; e < model.loss_trace.size(); ++e) EXPECT_LE(model.loss_trace[e], model.loss_trace[e - 1] + 1e-12);
  const auto scores = predict_scores(model, test);
  EXPECT_NO_THROW(scores.validate());
}

TEST(Mlp, LearnsXor) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int rep = 0; rep < 5; ++rep) {
    x.insert(x.end(), {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    y.insert(y.end(), {0, 1, 1, 0});
  }
  const auto t = make_table(x, y);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::kMlp;
  spec.num_classes = 2;
  spec.hidden_units = 16;
  spec.learning_rate = 0.5;
  spec.epochs = 3000;
  spec.seed = 7;
  const auto model = fit(spec, t);
  EXPECT_EQ(accuracy(predict_labels(model, t), t), 1.0);
  // Logistic regression cannot do better than 3/4 on XOR.
  spec.kind = ClassifierKind::kLogreg;
  EXPECT_LE(accuracy(predict_labels(fit(spec, t), t), t), 0.75);
}

TEST(Mlp, MiniBatchAndDeterminism) {
  const auto t = blobs(2, 30, 3, 2.5, 4);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::kMlp;
  spec.hidden_units = 8;
  spec.batch_size = 16;
  spec.epochs = 50;
  spec.learning_rate = 0.05;
  spec.seed = 11;
  const auto a = fit(spec, t);
  EXPECT_EQ(model_to_json(a), model_to_json(fit(spec, t)));
  spec.seed = 12;
  EXPECT_NE(model_to_json(a), model_to_json(fit(spec, t)));
  EXPECT_GE(accuracy(predict_labels(a, t), t), 0.9);
}

TEST(GradientCheck, AnalyticMatchesNumeric) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<double>> x(12, std::vector<double>(6));
    std::vector<int> y(12);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double& v : x[i]) v = n(rng);
      y[i] = static_cast<int>(i % 4);
    }
    const auto t = make_table(x, y);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::kLogreg;
    spec.num_classes = 4;
    spec.seed = static_cast<std::uint64_t>(trial);
    spec.l2 = 0.01;
    const auto lr = gradient_check(spec, t);
    EXPECT_LT(lr.max_relative_error, 1e-6);
    EXPECT_EQ(lr.parameters, 4u * 6u + 4u);
    spec.kind = ClassifierKind::kMlp;
    spec.hidden_units = 5;
    spec.mlp_l2 = 0.01;
    const auto mlp = gradient_check(spec, t);
    EXPECT_LT(mlp.max_relative_error, 1e-4);
    EXPECT_EQ(mlp.parameters, 5u * 6u + 5u + 4u * 5u + 4u);
  }
  ClassifierSpec knn;
  EXPECT_EQ(code_of([&] { gradient_check(knn, make_table({{1}}, {0})); }), ErrorCode::kInvalidArgument);
}

TEST(GradientCheck, ZeroInitLossIsLogC) {
  ClassifierSpec spec;
  spec.kind = ClassifierKind::kLogreg;
  spec.zero_init = true;
  spec.l2 = 0;
  const auto r = gradient_check(spec, make_table({{1, 2}, {3, 4}}, {0, 5}));
  EXPECT_NEAR(r.loss, std::log(static_cast<double>(kClassCount)), 1e-12);
}

TEST(Lda, SeparatesBlobsAndOnlyScoresSeenClasses) {
  auto train = blobs(3, 40, 5, 3.0, 6);
  for (auto& r : train.rows) r.label = r.label == 2 ? 9 : r.label;
  ClassifierSpec spec;
  spec.kind = ClassifierKind::kLda;
  const auto model = fit(spec, train);
  EXPECT_EQ(model.lda_classes, (std::vector<int>{0, 1, 9}));
  EXPECT_GE(accuracy(predict_labels(model, train), train), 0.95);
  const auto s = predict_scores(model, train);
  for (std::size_t r = 0; r < s.rows(); ++r) EXPECT_EQ(s(r, 2), 0.0);
}

TEST(Lda, SingularCovarianceWithoutRidge) {
  // The second feature is a copy of the first.
  const auto t = make_table({{1, 1}, {2, 2}, {3, 3}, {4, 4}}, {0, 0, 1, 1});
  ClassifierSpec spec;
  spec.kind = ClassifierKind::kLda;
  spec.ridge = 0;
  EXPECT_EQ(code_of([&] { fit(spec, t); }), ErrorCode::kDegenerate);
  spec.ridge = 1e-3;
  EXPECT_NO_THROW(fit(spec, t));
}

TEST(Fit, Errors) {
  ClassifierSpec spec;
  EXPECT_EQ(code_of([&] { fit(spec, FeatureTable{"x", 2, {}}); }), ErrorCode::kInvalidArgument);
  spec.k = 0;
  EXPECT_EQ(code_of([&] { fit(spec, make_table({{1}}, {0})); }), ErrorCode::kInvalidArgument);
  spec = {};
  spec.num_classes = 2;
  EXPECT_EQ(code_of([&] { fit(spec, make_table({{1}}, {3})); }), ErrorCode::kOutOfRange);
  spec = {};
  const auto model = fit(spec, make_table({{1, 2}}, {0}));
  EXPECT_EQ(code_of([&] { predict_scores(model, make_table({{1}}, {0})); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { parse_classifier_kind("svm"); }), ErrorCode::kInvalidArgument);
  auto nan_table = make_table({{1}}, {0});
  nan_table.rows[0].values[0] = NAN;
  EXPECT_EQ(code_of([&] { fit(spec, nan_table); }), ErrorCode::kNonFinite);
}

TEST(ModelFile, RoundTripsEveryKind) {
  support::TempDir dir;
  const auto t = blobs(3, 10, 3, 2.0, 8);
  for (auto kind : {ClassifierKind::kKnn, ClassifierKind::kMlp, ClassifierKind::kLogreg, ClassifierKind::kLda}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.hidden_units = 6;
    spec.epochs = 20;
    const auto model = fit(spec, t);
    const auto path = dir / (std::string(to_string(kind)) + ".json");
    save_model(model, path);
    const auto back = load_model(path);
    EXPECT_EQ(predict_scores(back, t), predict_scores(model, t)) << to_string(kind);
    EXPECT_EQ(model_to_json(back), model_to_json(model));
  }
}

TEST(ModelFile, Errors) {
  support::TempDir dir;
  EXPECT_EQ(code_of([&] { load_model(dir / "missing.json"); }), ErrorCode::kNotFound);
  ClassifierSpec spec;
  auto text = model_to_json(fit(spec, make_table({{1, 2}, {3, 4}}, {0, 1})));
  csv::write_text(dir / "trunc.json", text.substr(0, text.size() / 2));
  EXPECT_EQ(code_of([&] { load_model(dir / "trunc.json"); }), ErrorCode::kMalformed);
  const auto pos = text.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "\"version\": 9");
  EXPECT_EQ(code_of([&] { model_from_json(text); }), ErrorCode::kVersionMismatch);
  EXPECT_EQ(code_of([] { model_from_json("{\"format\":\"other\"}"); }), ErrorCode::kMalformed);
  EXPECT_EQ(code_of([] { model_from_json("[1,2]"); }), ErrorCode::kMalformed);
}

TEST(Scores, ArgmaxTiesAndCsvRoundTrip) {
  ScoreMatrix s;
  s.num_classes = 3;
  s.values = {0.5, 0.5, 0.0, 0.1, 0.2, 0.7, 1.0 / 3, 1.0 / 3, 1.0 / 3};
  s.ids = {"a", "b", "c"};
  s.truth = {1, 2, 0};
  EXPECT_EQ(predict_labels(s), (std::vector<int>{0, 2, 0}));
  support::TempDir dir;
  write_scores_csv(s, dir / "s.csv");
  EXPECT_EQ(read_scores_csv(dir / "s.csv"), s);
  auto bad = s;
  bad.values[0] = 0.6;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::kOutOfRange);
  bad = s;
  bad.values[0] = NAN;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::kNonFinite);
  bad = s;
  bad.truth.pop_back();
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::kDimensionMismatch);
  csv::write_text(dir / "bad.csv", "id,label,s0,s1\na,0,0.5\n");
  EXPECT_EQ(code_of([&] { read_scores_csv(dir / "bad.csv"); }), ErrorCode::kMalformed);
  csv::write_text(dir / "bad2.csv", "id,label,s0,s1\na,4,0.5,0.5\n");
  EXPECT_EQ(code_of([&] { read_scores_csv(dir / "bad2.csv"); }), ErrorCode::kOutOfRange);
}
