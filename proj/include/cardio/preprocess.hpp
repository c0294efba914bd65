#pragma once

// Nominal encoding, z-score standardization, and the stratified train/test split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardio/dataset.hpp"
#include "cardio/error.hpp"
#include "cardio/matrix.hpp"
#include "cardio/rng.hpp"

namespace cardio {

/// Maps the 11 raw feature columns to the model input layout. Nominal columns
/// with more than two levels expand to one indicator per level (no level is
/// dropped); everything else passes through. Column order follows the schema.
struct EncodingSpec {
  std::vector<std::size_t> one_hot_columns;
  std::vector<std::size_t> passthrough_columns;
  std::vector<std::string> output_layout;
  std::vector<std::size_t> numeric_outputs;  // derived indices fed by numeric columns

  std::size_t width() const { return output_layout.size(); }

  static EncodingSpec from_schema(const FeatureSchema& schema = FeatureSchema::heart()) {
    EncodingSpec spec;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const auto& column = schema.column(c);
      if (column.kind == ColumnKind::nominal && column.domain.size() > 2) {
        spec.one_hot_columns.push_back(c);
        for (int level : column.domain) spec.output_layout.push_back(column.name + "=" + std::to_string(level));
      } else {
        spec.passthrough_columns.push_back(c);
        if (column.kind == ColumnKind::numeric) spec.numeric_outputs.push_back(spec.output_layout.size());
        spec.output_layout.push_back(column.name);
      }
    }
    return spec;
  }

  friend bool operator==(const EncodingSpec&, const EncodingSpec&) = default;
};

/// Encode one raw feature row (11 values, canonical order).
inline std::vector<double> encode_row(std::span<const double> raw, const EncodingSpec& spec,
                                      std::string_view where = "input") {
  const auto& schema = FeatureSchema::heart();
  require_width(raw.size(), kFeatureCount, "encode_row");
  std::vector<double> out;
  out.reserve(spec.width());
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    const auto& column = schema.column(c);
    const double v = raw[c];
    if (!std::isfinite(v)) throw DomainError(std::string(where) + ", column '" + column.name + "': non-finite value");
    if (column.kind == ColumnKind::nominal && !column.allows(v)) {
      throw DomainError(std::string(where) + ", column '" + column.name + "': value " + format_double(v) +
                        " not in domain " + describe_domain(column));
    }
    const bool one_hot = std::find(spec.one_hot_columns.begin(), spec.one_hot_columns.end(), c) !=
                         spec.one_hot_columns.end();
    if (one_hot) {
      for (int level : column.domain) out.push_back(v == level ? 1.0 : 0.0);
    } else {
      out.push_back(v);
    }
  }
  return out;
}

struct EncodedMatrix {
  Matrix values;
  std::vector<std::string> layout;
};

inline EncodedMatrix encode(const Dataset& d, const EncodingSpec& spec) {
  EncodedMatrix out{Matrix(0, spec.width()), spec.output_layout};
  for (std::size_t r = 0; r < d.size(); ++r) {
    out.values.append_row(encode_row(d.features.row(r), spec, "row " + std::to_string(r)));
  }
  return out;
}

struct StandardizationParams {
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<std::size_t> applies_to;
  std::size_t width = 0;

  friend bool operator==(const StandardizationParams&, const StandardizationParams&) = default;
};

/// Per-column mean and population standard deviation over the given rows.
inline StandardizationParams fit_standardize(const Matrix& train, std::span<const std::size_t> indices,
                                             std::span<const std::string> names = {}) {
  if (train.rows() < 2) {
    throw InsufficientDataError("standardization needs at least 2 rows, got " + std::to_string(train.rows()));
  }
  StandardizationParams p;
  p.width = train.cols();
  const auto n = static_cast<double>(train.rows());
  for (auto c : indices) {
    if (c >= train.cols()) throw ShapeError("standardization index " + std::to_string(c) + " out of range");
    double mean = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) mean += train(r, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) var += (train(r, c) - mean) * (train(r, c) - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0)) {
      const auto name = c < names.size() ? names[c] : "column " + std::to_string(c);
      throw DegenerateFeatureError("zero variance in '" + name + "'");
    }
    p.means.push_back(mean);
    p.stds.push_back(sd);
    p.applies_to.push_back(c);
  }
  return p;
}

inline void apply_standardize_row(std::span<double> row, const StandardizationParams& p) {
  require_width(row.size(), p.width, "apply_standardize");
  for (std::size_t k = 0; k < p.applies_to.size(); ++k) {
    auto& v = row[p.applies_to[k]];
    v = (v - p.means[k]) / p.stds[k];
  }
}

inline Matrix apply_standardize(Matrix m, const StandardizationParams& p) {
  require_width(m.cols(), p.width, "apply_standardize");
  for (std::size_t r = 0; r < m.rows(); ++r) apply_standardize_row(m.row(r), p);
  return m;
}

/// Preprocessing carried by every trained model: encoding plus optional scaling.
struct Preprocessor {
  EncodingSpec encoding = EncodingSpec::from_schema();
  std::optional<StandardizationParams> scaling;

  static Preprocessor fit(const Dataset& train, bool standardize) {
    Preprocessor p;
    if (standardize) {
      const auto encoded = encode(train, p.encoding);
      p.scaling = fit_standardize(encoded.values, p.encoding.numeric_outputs, encoded.layout);
    }
    return p;
  }

  Matrix transform(const Dataset& d) const {
    auto m = encode(d, encoding).values;
    return scaling ? apply_standardize(std::move(m), *scaling) : m;
  }

  std::vector<double> transform_row(std::span<const double> raw) const {
    auto row = encode_row(raw, encoding);
    if (scaling) apply_standardize_row(row, *scaling);
    return row;
  }

  friend bool operator==(const Preprocessor&, const Preprocessor&) = default;
};

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  bool stratify = true;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Split row indices so that |first| = round(fraction * n). When stratified,
/// each class contributes floor(fraction * n_c) rows to the first part and the
/// leftover rows go to the classes with the largest fractional remainders
/// (ties in seeded order). Both parts are returned in ascending index order.
inline SplitIndices partition_indices(const Labels& labels, double fraction, std::uint64_t seed, bool stratify) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0,1), got " + format_double(fraction));
  }
  const auto n = labels.size();
  const auto n_first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  Rng rng(seed);
  SplitIndices out;

  if (!stratify) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(std::span(idx));
    out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_first));
    out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_first), idx.end());
  } else {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] != 0 && labels[i] != 1) throw DomainError("non-binary label at row " + std::to_string(i));
      by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty()) {
      throw StratificationError("stratified split needs both classes present");
    }
    std::array<std::size_t, 2> take{};
    std::array<double, 2> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 2; ++c) {
      const double ideal = fraction * static_cast<double>(by_class[c].size());
      take[c] = static_cast<std::size_t>(std::floor(ideal));
      remainder[c] = ideal - static_cast<double>(take[c]);
      assigned += take[c];
    }
    std::array<std::size_t, 2> order{0, 1};
    rng.shuffle(std::span(order));
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n_first && k < 2; ++k) {
      if (take[order[k]] < by_class[order[k]].size()) {
        ++take[order[k]];
        ++assigned;
      }
    }
    for (std::size_t c = 0; c < 2; ++c) {
      auto& idx = by_class[c];
      rng.shuffle(std::span(idx));
      out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]));
      out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]), idx.end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline SplitIndices split_indices(const Dataset& d, const SplitConfig& c) {
  if (d.size() < 5) throw InsufficientDataError("split needs at least 5 rows, got " + std::to_string(d.size()));
  return partition_indices(d.target, c.train_fraction, c.seed, c.stratify);
}

inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d, const SplitConfig& c) {
  const auto idx = split_indices(d, c);
  return {d.subset(idx.train), d.subset(idx.test)};
}

}  // namespace cardio
