#pragma once

// End-to-end steps shared by the command-line tool and the acceptance suite:
// split -> train or tune -> evaluate.

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "cardio/classifier.hpp"
#include "cardio/dataset.hpp"
#include "cardio/metrics.hpp"
#include "cardio/model_selection.hpp"
#include "cardio/preprocess.hpp"
#include "cardio/report.hpp"

namespace cardio {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// CARDIO_SEED overrides the built-in default seed.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("CARDIO_SEED");
  if (!env || !*env) return kDefaultSeed;
  try {
    const auto v = parse_int(env, "CARDIO_SEED");
    if (v < 0) throw ParseError("negative");
    return static_cast<std::uint64_t>(v);
  } catch (const ParseError&) {
    throw ConfigError(std::string("CARDIO_SEED must be a non-negative integer, got '") + env + "'");
  }
}

/// UTC time from SOURCE_DATE_EPOCH, or "unspecified". Wall-clock time is
/// never embedded so that repeated runs produce identical bytes.
inline std::string artifact_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (!env || !*env) return "unspecified";
  long long secs = 0;
  try {
    secs = parse_int(env, "SOURCE_DATE_EPOCH");
  } catch (const ParseError&) {
    throw ConfigError(std::string("SOURCE_DATE_EPOCH must be an integer, got '") + env + "'");
  }
  const auto t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct TrainOutcome {
  TrainedModel model;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

inline double accuracy_on(const TrainedModel& m, const Dataset& d) {
  Labels pred;
  for (const auto& p : m.predict_all(d)) pred.push_back(p.label);
  return compute_metrics(confusion(d.target, pred)).accuracy;
}

/// Split, then fit `spec` on the training part.
inline TrainOutcome train_on_split(const ClassifierSpec& spec, const Dataset& data, const SplitConfig& split) {
  const auto [train_set, test_set] = stratified_split(data, split);
  TrainOutcome out{train(spec, train_set)};
  out.model.meta.split = split;
  out.model.meta.provenance = data.provenance;
  out.model.meta.timestamp = artifact_timestamp();
  out.train_accuracy = accuracy_on(out.model, train_set);
  out.test_accuracy = accuracy_on(out.model, test_set);
  return out;
}

struct TuneOutcome {
  GridSearchResult search;
  TrainOutcome final;
};

/// Grid search inside the training split, then refit the best candidate on
/// the whole training split. The test split is never seen during selection.
inline TuneOutcome tune_on_split(const ParamGrid& grid, const Dataset& data, const SplitConfig& split, CvConfig cv,
                                 bool standardize = true) {
  const auto [train_set, test_set] = stratified_split(data, split);
  cv.standardize = standardize;
  TuneOutcome out;
  out.search = grid_search(grid, train_set, cv);
  const ClassifierSpec spec{grid.kind, grid.hyperparams(out.search.best_index), split.seed, standardize};
  out.final.model = train(spec, train_set);
  auto& meta = out.final.model.meta;
  meta.split = split;
  meta.provenance = data.provenance;
  meta.timestamp = artifact_timestamp();
  meta.notes.push_back("selected by " + std::to_string(out.search.folds) + "-fold cross-validation, mean accuracy " +
                       format_double(out.search.best_mean_score));
  out.final.train_accuracy = accuracy_on(out.final.model, train_set);
  out.final.test_accuracy = accuracy_on(out.final.model, test_set);
  return out;
}

enum class EvalSplit { test, all };

struct EvaluationResult {
  EvaluationRecord record;
  std::size_t rows = 0;
  std::vector<std::string> warnings;
};

/// Evaluate on the held-out split recorded in the model (or on all rows).
/// A different split seed or data file is reported as a warning.
inline EvaluationResult evaluate_model(const TrainedModel& m, const Dataset& data, EvalSplit which,
                                       std::optional<std::uint64_t> seed_override = std::nullopt,
                                       double threshold = kDefaultThreshold) {
  EvaluationResult out;
  const auto& prov = m.meta.provenance;
  if (!prov.content_crc.empty() && !data.provenance.content_crc.empty() &&
      (prov.content_crc != data.provenance.content_crc || prov.rows != data.provenance.rows)) {
    out.warnings.push_back("provenance: model was trained on " + prov.source + " (" + std::to_string(prov.rows) +
                           " rows, crc " + prov.content_crc + "), evaluating on " + data.provenance.source + " (" +
                           std::to_string(data.provenance.rows) + " rows, crc " + data.provenance.content_crc + ")");
  }
  Dataset eval_set = data;
  if (which == EvalSplit::test) {
    auto split = m.meta.split;
    if (seed_override && *seed_override != split.seed) {
      out.warnings.push_back("seed: model split used seed " + std::to_string(split.seed) + ", evaluating with seed " +
                             std::to_string(*seed_override));
      split.seed = *seed_override;
    }
    eval_set = stratified_split(data, split).second;
  }
  const auto preds = m.predict_all(eval_set, threshold);
  Labels labels;
  std::vector<double> scores;
  for (const auto& p : preds) {
    labels.push_back(p.label);
    scores.push_back(p.score);
  }
  out.rows = eval_set.size();
  out.record.algorithm = display_name(m.kind);
  out.record.confusion = confusion(eval_set.target, labels);
  out.record.metrics = compute_metrics(out.record.confusion);
  const auto& cm = out.record.confusion;
  if (cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0) out.record.metrics.auc = roc_auc(eval_set.target, scores);
  return out;
}

}  // namespace cardio
