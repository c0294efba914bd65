#pragma once

// Uniform train / predict contract over the four model families.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "cardio/dataset.hpp"
#include "cardio/error.hpp"
#include "cardio/knn.hpp"
#include "cardio/logistic_regression.hpp"
#include "cardio/matrix.hpp"
#include "cardio/mlp.hpp"
#include "cardio/preprocess.hpp"
#include "cardio/svm.hpp"
#include "cardio/text.hpp"

namespace cardio {

enum class ModelKind { logreg, knn, svm, mlp };

inline constexpr std::array<ModelKind, 4> kAllKinds{ModelKind::logreg, ModelKind::knn, ModelKind::svm, ModelKind::mlp};

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::logreg: return "logreg";
    case ModelKind::knn: return "knn";
    case ModelKind::svm: return "svm";
    case ModelKind::mlp: return "mlp";
  }
  return "?";
}

inline std::string display_name(ModelKind k) {
  switch (k) {
    case ModelKind::logreg: return "Logistic Regression";
    case ModelKind::knn: return "K-Nearest Neighbors";
    case ModelKind::svm: return "Support Vector Machine";
    case ModelKind::mlp: return "Artificial Neural Network";
  }
  return "?";
}

inline ModelKind parse_kind(std::string_view s) {
  for (auto k : kAllKinds) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(s) + "' (valid: logreg, knn, svm, mlp)");
}

using Hyperparams = std::variant<LogRegHyperparams, KnnHyperparams, SvmHyperparams, MlpHyperparams>;

inline Hyperparams default_hyperparams(ModelKind k) {
  switch (k) {
    case ModelKind::logreg: return LogRegHyperparams{};
    case ModelKind::knn: return KnnHyperparams{};
    case ModelKind::svm: return SvmHyperparams{};
    case ModelKind::mlp: return MlpHyperparams{};
  }
  throw ConfigError("unknown model kind");
}

inline ModelKind kind_of(const Hyperparams& hp) { return static_cast<ModelKind>(hp.index()); }

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline double num(const std::string& v, const std::string& key) {
  auto d = try_parse_double(v);
  if (!d) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return *d;
}

inline int integer(const std::string& v, const std::string& key) {
  try {
    return static_cast<int>(parse_int(v, key));
  } catch (const ParseError&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

inline std::vector<std::size_t> parse_widths(const std::string& v, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& tok : split(v, 'x')) {
    const int w = integer(std::string(trim(tok)), key);
    if (w < 1) throw ConfigError(key + ": widths must be >= 1");
    out.push_back(static_cast<std::size_t>(w));
  }
  return out;
}

}  // namespace detail

/// Set one hyper-parameter from text. Unknown keys are configuration errors.
inline void set_hyperparam(Hyperparams& hp, const std::string& key, const std::string& value) {
  using namespace detail;
  const bool known = std::visit(
      [&](auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogRegHyperparams>) {
          if (key == "lambda") p.lambda = num(value, key);
          else if (key == "learning_rate") p.learning_rate = num(value, key);
          else if (key == "max_iters") p.max_iters = integer(value, key);
          else if (key == "tol") p.tol = num(value, key);
          else return false;
        } else if constexpr (std::is_same_v<T, KnnHyperparams>) {
          if (key == "k") p.k = integer(value, key);
          else if (key == "metric") {
            if (value == "euclidean") p.metric = DistanceMetric::euclidean;
            else if (value == "manhattan") p.metric = DistanceMetric::manhattan;
            else throw ConfigError("metric: expected euclidean or manhattan, got '" + value + "'");
          } else if (key == "weighting") {
            if (value == "uniform") p.weighting = VoteWeighting::uniform;
            else if (value == "inverse_distance") p.weighting = VoteWeighting::inverse_distance;
            else throw ConfigError("weighting: expected uniform or inverse_distance, got '" + value + "'");
          } else return false;
        } else if constexpr (std::is_same_v<T, SvmHyperparams>) {
          if (key == "C") p.C = num(value, key);
          else if (key == "kernel") {
            if (value == "linear") p.kernel.kind = KernelKind::linear;
            else if (value == "rbf") p.kernel.kind = KernelKind::rbf;
            else throw ConfigError("kernel: expected linear or rbf, got '" + value + "'");
          } else if (key == "gamma") p.kernel.gamma = num(value, key);
          else if (key == "tol") p.tol = num(value, key);
          else if (key == "max_passes") p.max_passes = integer(value, key);
          else if (key == "max_sweeps") p.max_sweeps = integer(value, key);
          else return false;
        } else {
          if (key == "hidden") p.hidden = parse_widths(value, key);
          else if (key == "learning_rate") p.learning_rate = num(value, key);
          else if (key == "beta1") p.beta1 = num(value, key);
          else if (key == "beta2") p.beta2 = num(value, key);
          else if (key == "adam_eps") p.adam_eps = num(value, key);
          else if (key == "batch_size") p.batch_size = integer(value, key);
          else if (key == "dropout") p.dropout = num(value, key);
          else if (key == "l2") p.l2 = num(value, key);
          else if (key == "max_epochs") p.max_epochs = integer(value, key);
          else if (key == "patience") p.patience = integer(value, key);
          else if (key == "plateau") p.plateau = parse_bool(value, key);
          else if (key == "plateau_factor") p.plateau_factor = num(value, key);
          else if (key == "plateau_patience") p.plateau_patience = integer(value, key);
          else if (key == "plateau_min_delta") p.plateau_min_delta = num(value, key);
          else if (key == "min_lr") p.min_lr = num(value, key);
          else if (key == "validation_fraction") p.validation_fraction = num(value, key);
          else return false;
        }
        return true;
      },
      hp);
  if (!known) {
    throw ConfigError("unknown hyper-parameter '" + key + "' for model kind " + to_string(kind_of(hp)));
  }
}

/// Canonical, fully explicit key=value form (stable order).
inline KeyValues hyperparams_to_text(const Hyperparams& hp) {
  using detail::bool_text;
  return std::visit(
      [](const auto& p) -> KeyValues {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogRegHyperparams>) {
          return {{"lambda", format_double(p.lambda)},
                  {"learning_rate", format_double(p.learning_rate)},
                  {"max_iters", std::to_string(p.max_iters)},
                  {"tol", format_double(p.tol)}};
        } else if constexpr (std::is_same_v<T, KnnHyperparams>) {
          return {{"k", std::to_string(p.k)}, {"metric", to_string(p.metric)}, {"weighting", to_string(p.weighting)}};
        } else if constexpr (std::is_same_v<T, SvmHyperparams>) {
          return {{"C", format_double(p.C)},
                  {"kernel", to_string(p.kernel.kind)},
                  {"gamma", format_double(p.kernel.gamma)},
                  {"tol", format_double(p.tol)},
                  {"max_passes", std::to_string(p.max_passes)},
                  {"max_sweeps", std::to_string(p.max_sweeps)}};
        } else {
          return {{"hidden", join(p.hidden, "x", [](std::size_t w) { return std::to_string(w); })},
                  {"learning_rate", format_double(p.learning_rate)},
                  {"beta1", format_double(p.beta1)},
                  {"beta2", format_double(p.beta2)},
                  {"adam_eps", format_double(p.adam_eps)},
                  {"batch_size", std::to_string(p.batch_size)},
                  {"dropout", format_double(p.dropout)},
                  {"l2", format_double(p.l2)},
                  {"max_epochs", std::to_string(p.max_epochs)},
                  {"patience", std::to_string(p.patience)},
                  {"plateau", bool_text(p.plateau)},
                  {"plateau_factor", format_double(p.plateau_factor)},
                  {"plateau_patience", std::to_string(p.plateau_patience)},
                  {"plateau_min_delta", format_double(p.plateau_min_delta)},
                  {"min_lr", format_double(p.min_lr)},
                  {"validation_fraction", format_double(p.validation_fraction)}};
        }
      },
      hp);
}

inline void validate_hyperparams(const Hyperparams& hp) {
  std::visit([](const auto& p) { p.validate(); }, hp);
}

struct ClassifierSpec {
  ModelKind kind = ModelKind::knn;
  Hyperparams hp = KnnHyperparams{};
  std::uint64_t seed = 42;
  bool standardize = true;

  static ClassifierSpec defaults(ModelKind k, std::uint64_t seed = 42) {
    return {k, default_hyperparams(k), seed, true};
  }

  /// Build from key=value pairs. Recognized non-hyper-parameter keys: model, seed, standardize.
  static ClassifierSpec from_key_values(const KeyValues& kv, std::optional<ModelKind> kind_hint = std::nullopt) {
    std::optional<ModelKind> kind = kind_hint;
    for (const auto& [k, v] : kv) {
      if (k == "model") {
        const auto parsed = parse_kind(v);
        if (kind && *kind != parsed) {
          throw ConfigError(std::string("spec names model ") + to_string(parsed) + " but " + to_string(*kind) +
                            " was requested");
        }
        kind = parsed;
      }
    }
    if (!kind) throw ConfigError("spec does not name a model kind (model=logreg|knn|svm|mlp)");
    auto spec = defaults(*kind);
    std::map<std::string, int> seen;
    for (const auto& [k, v] : kv) {
      if (++seen[k] > 1) throw ConfigError("spec repeats key '" + k + "'");
      if (k == "model") continue;
      if (k == "seed") {
        spec.seed = static_cast<std::uint64_t>(detail::integer(v, k));
      } else if (k == "standardize") {
        spec.standardize = detail::parse_bool(v, k);
      } else {
        set_hyperparam(spec.hp, k, v);
      }
    }
    validate_hyperparams(spec.hp);
    return spec;
  }
};

using ModelParams = std::variant<LogRegModel, KnnModel, SvmModel, MlpNetwork>;

struct TrainingMetadata {
  std::uint64_t seed = 42;
  std::string timestamp = "unspecified";
  Provenance provenance;
  std::string schema_fingerprint = FeatureSchema::heart().fingerprint();
  KeyValues hyperparams;
  SplitConfig split;  // split that produced the training rows
  std::vector<std::string> notes;
};

struct PredictionOutput {
  int label = 0;
  double score = 0.0;
  friend bool operator==(const PredictionOutput&, const PredictionOutput&) = default;
};

inline constexpr double kDefaultThreshold = 0.5;

struct TrainedModel {
  ModelKind kind = ModelKind::knn;
  ModelParams params;
  Preprocessor preprocess;
  TrainingMetadata meta;

  /// Decision on an already encoded (and scaled) row.
  PredictionOutput predict_encoded(std::span<const double> x, double threshold = kDefaultThreshold) const {
    double score = 0.0;
    int tie_label = 1;
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LogRegModel>) {
            score = m.predict_proba(x);
          } else if constexpr (std::is_same_v<T, KnnModel>) {
            const auto v = m.vote(x);
            score = v.score;
            tie_label = v.tie_label;
          } else if constexpr (std::is_same_v<T, SvmModel>) {
            score = m.score(x);
          } else {
            score = m.predict_proba(x);
          }
        },
        params);
    const int label = score > threshold ? 1 : (score < threshold ? 0 : tie_label);
    return {label, score};
  }

  /// Raw row: 11 feature values in canonical schema order, target excluded.
  PredictionOutput predict(std::span<const double> raw_row, double threshold = kDefaultThreshold) const {
    return predict_encoded(preprocess.transform_row(raw_row), threshold);
  }

  std::vector<PredictionOutput> predict_all(const Dataset& d, double threshold = kDefaultThreshold) const {
    const auto X = preprocess.transform(d);
    std::vector<PredictionOutput> out;
    out.reserve(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out.push_back(predict_encoded(X.row(r), threshold));
    return out;
  }
};

/// Map a record of named fields to a raw row. Unknown names, missing features
/// and unparsable values are schema errors naming the field; "target" is ignored.
inline std::vector<double> record_to_row(const KeyValues& record,
                                         const std::map<std::string, std::string>& aliases = default_header_aliases()) {
  const auto& schema = FeatureSchema::heart();
  std::vector<std::optional<double>> values(kFeatureCount);
  for (const auto& [raw_key, v] : record) {
    std::string key = raw_key;
    if (auto it = aliases.find(key); it != aliases.end()) key = it->second;
    const auto idx = schema.index_of(key);
    if (!idx) throw SchemaError("unknown field '" + raw_key + "'");
    if (*idx == col::target) continue;
    if (values[*idx]) throw SchemaError("field '" + key + "' given twice");
    const auto d = try_parse_double(v);
    if (!d) throw SchemaError("field '" + key + "': not a number: '" + v + "'");
    values[*idx] = *d;
  }
  std::vector<double> row(kFeatureCount);
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (!values[c]) throw SchemaError("missing field '" + schema.column(c).name + "'");
    row[c] = *values[c];
  }
  return row;
}

inline void require_both_classes(std::span<const int> y, const char* what) {
  bool has0 = false, has1 = false;
  for (int v : y) (v == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw TrainingError(std::string(what) + ": training data must contain both classes");
}

/// encode -> fit standardization -> fit model. Deterministic given spec.seed.
inline TrainedModel train(const ClassifierSpec& spec, const Dataset& data) {
  if (kind_of(spec.hp) != spec.kind) throw ConfigError("hyper-parameters do not match model kind");
  validate_hyperparams(spec.hp);
  require_valid(data);
  require_both_classes(data.target, "train");

  TrainedModel m;
  m.kind = spec.kind;
  m.preprocess = Preprocessor::fit(data, spec.standardize);
  const auto X = m.preprocess.transform(data);
  const auto& y = data.target;

  std::visit(
      [&](const auto& hp) {
        using T = std::decay_t<decltype(hp)>;
        if constexpr (std::is_same_v<T, LogRegHyperparams>) {
          m.params = fit_logreg(X, y, hp);
        } else if constexpr (std::is_same_v<T, KnnHyperparams>) {
          m.params = fit_knn(X, y, hp);
        } else if constexpr (std::is_same_v<T, SvmHyperparams>) {
          auto svm = fit_smo(X, y, hp, spec.seed);
          if (!svm.converged) m.meta.notes.push_back("svm: SMO stopped before all KKT conditions held");
          m.params = std::move(svm);
        } else {
          m.params = train_mlp(X, y, hp, spec.seed);
        }
      },
      spec.hp);

  m.meta.seed = spec.seed;
  m.meta.provenance = data.provenance;
  m.meta.hyperparams = hyperparams_to_text(spec.hp);
  return m;
}

inline const SvmModel* as_svm(const TrainedModel& m) { return std::get_if<SvmModel>(&m.params); }

}  // namespace cardio
