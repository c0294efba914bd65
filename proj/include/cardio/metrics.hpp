#pragma once

// Confusion matrix, the scalar classification metrics, and rank-based ROC-AUC.
// The positive class is always label 1.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardio/error.hpp"
#include "cardio/text.hpp"

namespace cardio {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                     std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw ShapeError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw DomainError("confusion: non-binary value at position " + std::to_string(i));
    }
    if (t == 1) {
      p == 1 ? ++cm.tp : ++cm.fn;
    } else {
      p == 1 ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  /// Set when a ratio had a zero denominator and was reported as 0.
  bool degenerate = false;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline MetricReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ShapeError("compute_metrics: empty confusion matrix");
  MetricReport m;
  auto ratio = [&m](std::size_t num, std::size_t den) {
    if (den == 0) {
      m.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    m.degenerate = true;
  }
  return m;
}

/// Mann-Whitney AUC: P(score of random positive > score of random negative),
/// ties count one half. O(n log n) via average ranks.
inline double roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw ShapeError("roc_auc: length mismatch");
  const auto n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      const int y = y_true[order[k]];
      if (y != 0 && y != 1) throw DomainError("roc_auc: non-binary label");
      if (y == 1) {
        positive_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const auto n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("roc_auc: undefined with a single class present");
  const double np = static_cast<double>(n_pos);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

inline constexpr const char* kMetricsCsvHeader = "algorithm,accuracy,precision,recall,f1,auc";

/// One row in the layout of the comparison table; auc is empty when absent.
inline std::string metrics_csv_row(const std::string& algorithm, const MetricReport& m) {
  return algorithm + "," + format_double(m.accuracy) + "," + format_double(m.precision) + "," +
         format_double(m.recall) + "," + format_double(m.f1) + "," + (m.auc ? format_double(*m.auc) : "");
}

}  // namespace cardio
