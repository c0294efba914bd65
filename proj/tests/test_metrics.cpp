#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cardio/matrix.hpp"
#include "cardio/metrics.hpp"
#include "oracles.hpp"

using namespace cardio;

TEST(Confusion, PerfectPrediction) {
  const auto cm = confusion(Labels{1, 0, 1}, Labels{1, 0, 1});
  EXPECT_EQ(cm, (ConfusionMatrix{2, 0, 0, 1}));
}

TEST(Confusion, MixedCase) {
  const auto cm = confusion(Labels{1, 1, 1, 0, 0}, Labels{1, 0, 1, 0, 1});
  EXPECT_EQ(cm.tp, 2u);
  EXPECT_EQ(cm.fn, 1u);
  EXPECT_EQ(cm.tn, 1u);
  EXPECT_EQ(cm.fp, 1u);
}

TEST(Confusion, AllFalsePositives) {
  EXPECT_EQ(confusion(Labels{0, 0, 0, 0}, Labels{1, 1, 1, 1}), (ConfusionMatrix{0, 4, 0, 0}));
}

TEST(Confusion, RejectsBadInput) {
  EXPECT_THROW(confusion(Labels{1, 0}, Labels{1}), ShapeError);
  EXPECT_THROW(confusion(Labels{2}, Labels{1}), DomainError);
}

TEST(Metrics, MixedCaseValues) {
  const auto m = compute_metrics(ConfusionMatrix{2, 1, 1, 1});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
  EXPECT_FALSE(m.degenerate);
}

TEST(Metrics, PerfectClassifier) {
  const auto m = compute_metrics(ConfusionMatrix{7, 0, 0, 0});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, NoPositivePredictionsIsFlagged) {
  const auto m = compute_metrics(ConfusionMatrix{0, 0, 3, 2});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_TRUE(m.degenerate);
  EXPECT_FALSE(std::isnan(m.f1));
}

TEST(Metrics, AgreeWithBruteForceCounting) {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 200)(g);
    Labels t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(g() & 1U);
      p[i] = static_cast<int>(g() & 1U);
    }
    const auto c = oracle::count_pairs(t, p);
    const auto cm = confusion(t, p);
    ASSERT_EQ(static_cast<long>(cm.tp), c.tp);
    ASSERT_EQ(static_cast<long>(cm.fp), c.fp);
    ASSERT_EQ(static_cast<long>(cm.fn), c.fn);
    ASSERT_EQ(static_cast<long>(cm.tn), c.tn);
    const auto m = compute_metrics(cm);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    // Swapping truth and prediction transposes the off-diagonal.
    const auto swapped = confusion(p, t);
    ASSERT_EQ(swapped.tp, cm.tp);
    ASSERT_EQ(swapped.fp, cm.fn);
    ASSERT_EQ(swapped.fn, cm.fp);
  }
}

TEST(Auc, PerfectSeparation) { EXPECT_EQ(roc_auc(Labels{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.8, 0.9}), 1.0); }

TEST(Auc, TieIsHalf) { EXPECT_EQ(roc_auc(Labels{0, 1}, std::vector<double>{0.5, 0.5}), 0.5); }

TEST(Auc, FourPairs) {
  EXPECT_DOUBLE_EQ(roc_auc(Labels{0, 1, 0, 1}, std::vector<double>{0.3, 0.4, 0.6, 0.8}), 0.75);
}

TEST(Auc, SingleClassIsError) { EXPECT_THROW(roc_auc(Labels{1, 1}, std::vector<double>{0.1, 0.2}), DomainError); }

TEST(Auc, MatchesPairwiseAndIsRankInvariant) {
  std::mt19937_64 g(8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 100)(g);
    Labels y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(g() & 1U);
      s[i] = static_cast<double>(std::uniform_int_distribution<int>(0, 20)(g)) / 20.0;  // many ties
    }
    y[0] = 0;
    y[1] = 1;
    const double auc = roc_auc(y, s);
    ASSERT_NEAR(auc, oracle::pairwise_auc(y, s), 1e-12);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
    ASSERT_NEAR(roc_auc(y, t), auc, 1e-12);
  }
}

TEST(MetricsCsv, RowLayout) {
  MetricReport m{0.5, 0.25, 1.0, 0.4, 0.75, false};
  EXPECT_EQ(metrics_csv_row("knn", m), "knn,0.5,0.25,1,0.4,0.75");
  m.auc.reset();
  EXPECT_EQ(metrics_csv_row("knn", m), "knn,0.5,0.25,1,0.4,");
  EXPECT_STREQ(kMetricsCsvHeader, "algorithm,accuracy,precision,recall,f1,auc");
}
