#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cardio/model_selection.hpp"
#include "cardio/pipeline.hpp"
#include "fixtures.hpp"

using namespace cardio;

TEST(Folds, BalancedLabelsGiveOneOfEachPerFold) {
  const Labels y{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  CvConfig cfg;
  const auto folds = kfold_indices(y, cfg);
  ASSERT_EQ(folds.size(), 5u);
  for (const auto& f : folds) {
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(y[f[0]] + y[f[1]], 1);
  }
}

TEST(Folds, PartitionAndBalanceProperty) {
  std::mt19937_64 g(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(20, 300)(g);
    Labels y(n);
    for (auto& v : y) v = std::bernoulli_distribution(0.3)(g) ? 1 : 0;
    for (std::size_t i = 0; i < 10; ++i) y[i] = static_cast<int>(i % 2);
    CvConfig cfg;
    cfg.folds = std::uniform_int_distribution<int>(2, 5)(g);
    cfg.seed = g();
    const auto folds = kfold_indices(y, cfg);
    std::vector<int> seen(n, 0);
    std::size_t lo = n, hi = 0;
    std::array<std::size_t, 2> clo{n, n}, chi{0, 0};
    for (const auto& f : folds) {
      ASSERT_TRUE(std::is_sorted(f.begin(), f.end()));
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      std::array<std::size_t, 2> per{};
      for (auto i : f) {
        ++seen[i];
        ++per[static_cast<std::size_t>(y[i])];
      }
      for (std::size_t c = 0; c < 2; ++c) {
        clo[c] = std::min(clo[c], per[c]);
        chi[c] = std::max(chi[c], per[c]);
      }
    }
    for (int s : seen) ASSERT_EQ(s, 1);
    ASSERT_LE(hi - lo, 1u);
    for (std::size_t c = 0; c < 2; ++c) ASSERT_LE(chi[c] - clo[c], 1u);
  }
}

TEST(Folds, DeterministicAndSeedSensitive) {
  const auto d = fixture::random_dataset(100, 32);
  CvConfig a, b;
  b.seed = 43;
  EXPECT_EQ(kfold_indices(d.target, a), kfold_indices(d.target, a));
  EXPECT_NE(kfold_indices(d.target, a), kfold_indices(d.target, b));
}

TEST(Folds, TooFewMinorityRows) {
  Labels y(20, 0);
  y[0] = y[1] = 1;
  EXPECT_THROW(kfold_indices(y, CvConfig{}), StratificationError);
  CvConfig one;
  one.folds = 1;
  EXPECT_THROW(kfold_indices(y, one), ConfigError);
}

TEST(Grid, EnumerationOrder) {
  ParamGrid g{ModelKind::knn, {{"k", {"1", "3"}}, {"metric", {"euclidean", "manhattan"}}}};
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g.candidate(1), (KeyValues{{"k", "1"}, {"metric", "manhattan"}}));
  EXPECT_EQ(g.candidate(2), (KeyValues{{"k", "3"}, {"metric", "euclidean"}}));
}

TEST(Grid, FromKeyValues) {
  const auto g = ParamGrid::from_key_values(ModelKind::knn, {{"model", "knn"}, {"k", "1"}, {"k", "5"}, {"metric", "euclidean,manhattan"}});
  ASSERT_EQ(g.axes.size(), 2u);
  EXPECT_EQ(g.axes[0].values, (std::vector<std::string>{"1", "5"}));
  EXPECT_EQ(g.axes[1].values.size(), 2u);
  EXPECT_THROW(ParamGrid::from_key_values(ModelKind::knn, {{"model", "svm"}, {"k", "1"}}), ConfigError);
  EXPECT_THROW(ParamGrid::from_key_values(ModelKind::knn, {{"k", "x"}}), ConfigError);
  EXPECT_THROW(ParamGrid::from_key_values(ModelKind::knn, {{"gamma", "1"}}), ConfigError);
  EXPECT_THROW(ParamGrid::from_key_values(ModelKind::knn, {{"model", "knn"}}), ConfigError);
}

TEST(Grid, SizeGuard) {
  ParamAxis big{"k", {}};
  for (int i = 1; i <= 200; ++i) big.values.push_back(std::to_string(i));
  ParamAxis weights{"weighting", {"uniform", "inverse_distance"}};
  ParamGrid ok{ModelKind::knn, {big, weights}};
  EXPECT_NO_THROW(ok.validate());
  ParamAxis lam{"lambda", {}}, lr{"learning_rate", {}}, it{"max_iters", {}};
  for (int i = 1; i <= 30; ++i) {
    lam.values.push_back(std::to_string(i));
    lr.values.push_back(std::to_string(i));
    it.values.push_back(std::to_string(i));
  }
  ParamGrid huge{ModelKind::logreg, {lam, lr, it}};
  EXPECT_GT(huge.size(), kMaxGridSize);
  EXPECT_THROW(huge.validate(), ConfigError);
}

TEST(GridSearch, SingleCandidate) {
  const auto d = fixture::random_dataset(60, 33);
  ParamGrid g{ModelKind::knn, {{"k", {"3"}}}};
  const auto r = grid_search(g, d, CvConfig{});
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(r.candidates[0].fold_scores.size(), 5u);
}

namespace {

/// Two well separated clusters of 30 points each, with one mislabeled point
/// inside each cluster.
Dataset two_clusters() {
  std::mt19937_64 g(34);
  Dataset d;
  d.features = Matrix(0, kFeatureCount);
  std::normal_distribution<double> z(0.0, 3.0);
  for (int i = 0; i < 60; ++i) {
    const int cls = i % 2;
    std::vector<double> row{cls ? 65.0 : 40.0, 1, cls ? 4.0 : 2.0, 130, 240, 0, 0,
                            cls ? 110.0 : 170.0, static_cast<double>(cls), cls ? 2.5 : 0.0, cls ? 2.0 : 1.0};
    row[0] += std::round(z(g));
    row[3] += std::round(z(g));
    row[4] += std::round(z(g) * 5);
    row[7] += std::round(z(g));
    d.features.append_row(row);
    d.target.push_back(cls);
  }
  d.target[10] = 1;
  d.target[11] = 0;
  d.provenance = {"clusters", 60, ""};
  return d;
}

}  // namespace

TEST(GridSearch, PrefersSmoothingOverMemorizationOnNoisyClusters) {
  const auto d = two_clusters();
  ParamGrid g{ModelKind::knn, {{"k", {"1", "15"}}}};
  CvConfig cfg;
  const auto r = grid_search(g, d, cfg);
  // Independent re-evaluation of every fold for both candidates.
  const auto folds = kfold_indices(d.target, cfg);
  for (std::size_t c = 0; c < 2; ++c) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::size_t> tr;
      for (std::size_t o = 0; o < folds.size(); ++o) {
        if (o != f) tr.insert(tr.end(), folds[o].begin(), folds[o].end());
      }
      std::sort(tr.begin(), tr.end());
      ClassifierSpec spec{ModelKind::knn, g.hyperparams(c), 0, true};
      const auto m = train(spec, d.subset(tr));
      const auto test = d.subset(folds[f]);
      std::size_t hit = 0;
      const auto preds = m.predict_all(test);
      for (std::size_t i = 0; i < test.size(); ++i) hit += preds[i].label == test.target[i];
      const double acc = static_cast<double>(hit) / static_cast<double>(test.size());
      EXPECT_DOUBLE_EQ(r.candidates[c].fold_scores[f], acc);
      sum += acc;
    }
    EXPECT_DOUBLE_EQ(r.candidates[c].mean_score, sum / static_cast<double>(folds.size()));
  }
  EXPECT_EQ(r.best_index, 1u);
  EXPECT_GT(r.candidates[1].mean_score, r.candidates[0].mean_score);
}

TEST(GridSearch, BestHasMaximalMeanAndEarliestWinsTies) {
  const auto d = fixture::random_dataset(120, 35);
  ParamGrid g{ModelKind::knn, {{"k", {"1", "3", "5", "7", "9"}}, {"weighting", {"uniform", "inverse_distance"}}}};
  const auto r = grid_search(g, d, CvConfig{});
  double best = -1;
  std::size_t first = 0;
  for (std::size_t c = 0; c < r.candidates.size(); ++c) {
    if (r.candidates[c].mean_score > best) {
      best = r.candidates[c].mean_score;
      first = c;
    }
  }
  EXPECT_EQ(r.best_mean_score, best);
  EXPECT_EQ(r.best_index, first);
  // k=1 with uniform and inverse weighting vote identically.
  EXPECT_EQ(r.candidates[0].fold_scores, r.candidates[1].fold_scores);
}

TEST(GridSearch, ThreadCountDoesNotChangeResults) {
  const auto d = fixture::random_dataset(100, 36);
  ParamGrid g{ModelKind::svm, {{"C", {"0.5", "2"}}, {"kernel", {"linear", "rbf"}}}};
  CvConfig one, three;
  three.threads = 3;
  const auto a = grid_search(g, d, one);
  const auto b = grid_search(g, d, three);
  EXPECT_EQ(grid_result_csv(a), grid_result_csv(b));
}

TEST(GridSearch, FoldScalingUsesOnlyFoldTrainingRows) {
  const auto d = fixture::random_dataset(50, 37);
  const auto folds = kfold_indices(d.target, CvConfig{});
  std::vector<std::size_t> tr;
  for (std::size_t o = 1; o < folds.size(); ++o) tr.insert(tr.end(), folds[o].begin(), folds[o].end());
  std::sort(tr.begin(), tr.end());
  const auto fold_model = train(ClassifierSpec::defaults(ModelKind::knn), d.subset(tr));
  const auto full_model = train(ClassifierSpec::defaults(ModelKind::knn), d);
  EXPECT_NE(fold_model.preprocess.scaling->means, full_model.preprocess.scaling->means);
  const auto direct = Preprocessor::fit(d.subset(tr), true);
  EXPECT_EQ(fold_model.preprocess, direct);
}

TEST(GridSearch, CsvHasOneRowPerCandidate) {
  const auto d = fixture::random_dataset(60, 38);
  ParamGrid g{ModelKind::knn, {{"k", {"1", "3", "5"}}, {"metric", {"euclidean", "manhattan"}}}};
  const auto r = grid_search(g, d, CvConfig{});
  const auto t = parse_table(grid_result_csv(r));
  EXPECT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(t.header.front(), "candidate");
  std::size_t best_rows = 0;
  for (const auto& row : t.rows) best_rows += row[t.column("best")] == "1";
  EXPECT_EQ(best_rows, 1u);
}

TEST(GridSearch, FailingCandidatesAreExcluded) {
  const auto d = fixture::random_dataset(40, 39);
  // k=40 exceeds every fold's training size.
  ParamGrid g{ModelKind::knn, {{"k", {"40", "3"}}}};
  const auto r = grid_search(g, d, CvConfig{});
  EXPECT_TRUE(r.candidates[0].failed);
  EXPECT_EQ(r.best_index, 1u);
  ParamGrid all_bad{ModelKind::knn, {{"k", {"40"}}}};
  EXPECT_THROW(grid_search(all_bad, d, CvConfig{}), TrainingError);
}

TEST(Tune, NeverSeesTestRows) {
  const auto d = fixture::random_dataset(120, 40);
  SplitConfig split;
  ParamGrid g{ModelKind::knn, {{"k", {"1", "5"}}}};
  const auto out = tune_on_split(g, d, split, CvConfig{});
  const auto [train_set, test_set] = stratified_split(d, split);
  // Same search directly on the training rows.
  const auto direct = grid_search(g, train_set, CvConfig{});
  EXPECT_EQ(grid_result_csv(out.search), grid_result_csv(direct));
  EXPECT_EQ(out.final.model.preprocess, Preprocessor::fit(train_set, true));
}
