#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cardio/knn.hpp"
#include "oracles.hpp"

using namespace cardio;

namespace {

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

}  // namespace

TEST(Kneighbors, SelfQuery) {
  const Matrix X{{0, 0}, {1, 1}, {5, 5}};
  const auto m = fit_knn(X, Labels{0, 1, 1}, {1});
  const auto nn = m.kneighbors(std::vector<double>{1, 1}, 1);
  ASSERT_EQ(nn.size(), 1u);
  EXPECT_EQ(nn[0].index, 1u);
  EXPECT_EQ(nn[0].distance, 0.0);
}

TEST(Kneighbors, EnumeratedDistances) {
  const Matrix X{{0}, {1}, {3}};
  const auto m = fit_knn(X, Labels{0, 1, 1}, {2});
  const auto nn = m.kneighbors(std::vector<double>{2}, 2);
  EXPECT_EQ(nn[0].index, 1u);
  EXPECT_EQ(nn[1].index, 2u);
  EXPECT_EQ(nn[0].distance, 1.0);
  EXPECT_EQ(nn[1].distance, 1.0);
}

TEST(Kneighbors, EquidistantLowerIndexWins) {
  const Matrix X{{3}, {-1}, {1}};
  const auto m = fit_knn(X, Labels{0, 1, 0}, {1});
  EXPECT_EQ(m.kneighbors(std::vector<double>{0}, 1)[0].index, 1u);
}

TEST(Vote, MajorityScore) {
  const Matrix X{{0}, {1}, {2}, {10}};
  const auto m = fit_knn(X, Labels{1, 1, 0, 0}, {3});
  const auto v = m.vote(std::vector<double>{0.5});
  EXPECT_EQ(v.label, 1);
  EXPECT_DOUBLE_EQ(v.score, 2.0 / 3.0);
}

TEST(Vote, KOneScoreIsZeroOrOne) {
  const Matrix X{{0}, {1}};
  const auto m = fit_knn(X, Labels{0, 1}, {1});
  EXPECT_EQ(m.vote(std::vector<double>{0.9}).score, 1.0);
  EXPECT_EQ(m.vote(std::vector<double>{0.1}).score, 0.0);
}

TEST(Vote, TiedVoteTakesNearestLabel) {
  const Matrix X{{0}, {1}, {5}, {6}};
  const auto m = fit_knn(X, Labels{1, 0, 1, 0}, {2});
  EXPECT_EQ(m.vote(std::vector<double>{0.2}).label, 1);
  EXPECT_EQ(m.vote(std::vector<double>{0.2}).score, 0.5);
  EXPECT_EQ(m.vote(std::vector<double>{0.8}).label, 0);
}

TEST(Vote, RandomPlaneMatchesOracle) {
  std::mt19937_64 g(40);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix X(40, 2);
  Labels y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    X(i, 0) = u(g);
    X(i, 1) = u(g);
    y[i] = X(i, 0) * X(i, 1) > 0 ? 1 : 0;
  }
  const auto m = fit_knn(X, y, {5});
  for (int q = 0; q < 25; ++q) {
    const std::vector<double> query{u(g), u(g)};
    const auto expect = oracle::knn(rows_of(X), y, query, 5, false, false);
    const auto got = m.vote(query);
    EXPECT_EQ(got.label, expect.label);
    EXPECT_DOUBLE_EQ(got.score, expect.score);
  }
}

TEST(Neighbors, SortedAndAgreeWithFullSort) {
  std::mt19937_64 g(41);
  std::uniform_int_distribution<int> coord(0, 4);  // coarse grid forces distance ties
  Matrix X(30, 3);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 3; ++j) X(i, j) = coord(g);
  }
  const auto m = fit_knn(X, Labels(30, 0), {30});
  for (int q = 0; q < 20; ++q) {
    const std::vector<double> query{double(coord(g)), double(coord(g)), double(coord(g))};
    const auto nn = m.kneighbors(query, 30);
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < 30; ++i) all.push_back({oracle::euclid(rows_of(X)[i], query), i});
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 30; ++i) {
      ASSERT_EQ(nn[i].index, all[i].second);
      if (i) ASSERT_LE(nn[i - 1].distance, nn[i].distance);
    }
  }
}

TEST(Memorization, OneNearestNeighbourOnDistinctRows) {
  std::mt19937_64 g(42);
  std::normal_distribution<double> z;
  Matrix X(50, 4);
  Labels y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 4; ++j) X(i, j) = z(g);
    y[i] = static_cast<int>(g() & 1U);
  }
  const auto m = fit_knn(X, y, {1});
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(m.vote(X.row(i)).label, y[i]);
}

TEST(Permutation, InvariantWithoutTies) {
  std::mt19937_64 g(43);
  std::normal_distribution<double> z;
  Matrix X(35, 3);
  Labels y(35);
  for (std::size_t i = 0; i < 35; ++i) {
    for (std::size_t j = 0; j < 3; ++j) X(i, j) = z(g);
    y[i] = static_cast<int>(g() & 1U);
  }
  std::vector<std::size_t> perm(35);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), g);
  const auto a = fit_knn(X, y, {5});
  const auto b = fit_knn(X.select_rows(perm), select(y, perm), {5});
  for (int q = 0; q < 50; ++q) {
    const std::vector<double> query{z(g), z(g), z(g)};
    EXPECT_EQ(a.vote(query).label, b.vote(query).label);
    EXPECT_DOUBLE_EQ(a.vote(query).score, b.vote(query).score);
  }
}

TEST(Distance, Metrics) {
  const std::vector<double> a{0, 0}, b{3, 4};
  EXPECT_EQ(distance(DistanceMetric::euclidean, a, b), 5.0);
  EXPECT_EQ(distance(DistanceMetric::manhattan, a, b), 7.0);
}

TEST(Fit, Errors) {
  const Matrix X{{0}, {1}};
  EXPECT_THROW(fit_knn(X, Labels{0, 1}, {3}), ConfigError);
  EXPECT_THROW(fit_knn(X, Labels{0, 1}, {0}), ConfigError);
  EXPECT_THROW(fit_knn(X, Labels{0}, {1}), ShapeError);
}
