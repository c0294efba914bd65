#pragma once

// Exhaustive k-nearest-neighbour classifier.
//
// Tie-break chain: equal distances order by lower stored index; an exactly
// tied vote takes the label of the single nearest neighbour.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardio/error.hpp"
#include "cardio/matrix.hpp"

namespace cardio {

enum class DistanceMetric { euclidean, manhattan };
enum class VoteWeighting { uniform, inverse_distance };

inline const char* to_string(DistanceMetric m) { return m == DistanceMetric::euclidean ? "euclidean" : "manhattan"; }
inline const char* to_string(VoteWeighting w) { return w == VoteWeighting::uniform ? "uniform" : "inverse_distance"; }

struct KnnHyperparams {
  int k = 5;
  DistanceMetric metric = DistanceMetric::euclidean;
  VoteWeighting weighting = VoteWeighting::uniform;

  void validate() const {
    if (k < 1) throw ConfigError("knn: k must be >= 1");
  }
  friend bool operator==(const KnnHyperparams&, const KnnHyperparams&) = default;
};

inline constexpr double kInverseDistanceEpsilon = 1e-10;

inline double distance(DistanceMetric metric, std::span<const double> a, std::span<const double> b) {
  if (metric == DistanceMetric::euclidean) return std::sqrt(squared_distance(a, b));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

struct Neighbor {
  std::size_t index;
  double distance;
};

struct KnnVote {
  int label;
  double score;  // (weighted) fraction of positive votes
  int tie_label;  // label used when the score sits exactly on the threshold
};

struct KnnModel {
  Matrix stored;
  Labels labels;
  KnnHyperparams hp;

  std::vector<Neighbor> kneighbors(std::span<const double> query, int k) const {
    if (k < 1 || static_cast<std::size_t>(k) > stored.rows()) {
      throw ConfigError("knn: k=" + std::to_string(k) + " outside [1, " + std::to_string(stored.rows()) + "]");
    }
    require_width(query.size(), stored.cols(), "knn query");
    std::vector<Neighbor> all(stored.rows());
    for (std::size_t i = 0; i < stored.rows(); ++i) all[i] = {i, distance(hp.metric, stored.row(i), query)};
    const auto kk = static_cast<std::ptrdiff_t>(k);
    std::partial_sort(all.begin(), all.begin() + kk, all.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    });
    all.resize(static_cast<std::size_t>(k));
    return all;
  }

  KnnVote vote(std::span<const double> query) const {
    const auto nn = kneighbors(query, hp.k);
    double pos = 0.0, neg = 0.0;
    for (const auto& n : nn) {
      const double w =
          hp.weighting == VoteWeighting::uniform ? 1.0 : 1.0 / (n.distance + kInverseDistanceEpsilon);
      (labels[n.index] == 1 ? pos : neg) += w;
    }
    const int nearest = labels[nn.front().index];
    const double score = pos / (pos + neg);
    const int label = score > 0.5 ? 1 : (score < 0.5 ? 0 : nearest);
    return {label, score, nearest};
  }
};

inline KnnModel fit_knn(const Matrix& X, const Labels& y, const KnnHyperparams& hp) {
  hp.validate();
  if (X.rows() != y.size()) throw ShapeError("knn fit: rows != labels");
  if (static_cast<std::size_t>(hp.k) > X.rows()) {
    throw ConfigError("knn: k=" + std::to_string(hp.k) + " exceeds " + std::to_string(X.rows()) + " stored rows");
  }
  return {X, y, hp};
}

}  // namespace cardio
