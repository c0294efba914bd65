#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cardio/dataset.hpp"
#include "cardio/matrix.hpp"

namespace fixture {

inline const char* kHeader =
    "age,sex,chest pain type,resting bp s,cholesterol,fasting blood sugar,resting ecg,max heart rate,"
    "exercise angina,oldpeak,ST slope,target";

/// A plausible in-domain raw row (11 features).
inline std::vector<double> random_row(std::mt19937_64& g) {
  auto pick = [&](int lo, int hi) { return static_cast<double>(std::uniform_int_distribution<int>(lo, hi)(g)); };
  std::uniform_real_distribution<double> oldpeak(-1.0, 4.0);
  return {pick(28, 77),  pick(0, 1),   pick(1, 4),   pick(92, 200), pick(100, 560),
          pick(0, 1),    pick(0, 2),   pick(60, 202), pick(0, 1),    std::round(oldpeak(g) * 10) / 10,
          pick(0, 3)};
}

/// Random valid dataset whose label loosely depends on the features, so that
/// models have something to learn; both classes are always present.
inline cardio::Dataset random_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  cardio::Dataset d;
  d.features = cardio::Matrix(0, cardio::kFeatureCount);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = random_row(g);
    d.features.append_row(row);
    const double risk = 0.04 * (row[0] - 50) + 0.8 * row[8] + 0.5 * row[9] - 0.02 * (row[7] - 140) +
                        0.6 * (row[2] == 4) + std::normal_distribution<double>(0.0, 0.7)(g);
    d.target.push_back(risk > 0.5 ? 1 : 0);
  }
  d.target[0] = 0;
  d.target[1] = 1;
  d.provenance = {"random", n, ""};
  return d;
}

inline std::string csv_line(const std::vector<double>& row, int target) {
  std::string s;
  for (double v : row) s += cardio::format_double(v) + ",";
  return s + std::to_string(target);
}

}  // namespace fixture
