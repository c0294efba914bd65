#pragma once

// Stratified k-fold cross-validated grid search.
//
// Candidates enumerate the Cartesian product of the grid axes with the last
// axis varying fastest. Each (candidate, fold) job seeds its own generator
// from (cfg.seed, candidate, fold), so results do not depend on scheduling.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cardio/classifier.hpp"
#include "cardio/dataset.hpp"
#include "cardio/error.hpp"
#include "cardio/metrics.hpp"
#include "cardio/rng.hpp"
#include "cardio/text.hpp"

namespace cardio {

inline constexpr std::size_t kMaxGridSize = 10000;

struct ParamAxis {
  std::string name;
  std::vector<std::string> values;
};

struct ParamGrid {
  ModelKind kind = ModelKind::knn;
  std::vector<ParamAxis> axes;

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) {
      if (a.values.empty()) throw ConfigError("grid axis '" + a.name + "' is empty");
      if (n > kMaxGridSize / a.values.size() + 1) return kMaxGridSize + 1;
      n *= a.values.size();
    }
    return n;
  }

  void validate() const {
    const auto n = size();
    if (n > kMaxGridSize) {
      throw ConfigError("grid has more than " + std::to_string(kMaxGridSize) + " candidates");
    }
    for (std::size_t i = 0; i < axes.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (axes[i].name == axes[j].name) throw ConfigError("grid repeats axis '" + axes[i].name + "'");
      }
    }
    // Every value must be accepted by the model's parameter parser.
    for (const auto& a : axes) {
      for (const auto& v : a.values) {
        auto hp = default_hyperparams(kind);
        set_hyperparam(hp, a.name, v);
      }
    }
  }

  /// Parameter assignment of candidate i (last axis fastest).
  KeyValues candidate(std::size_t i) const {
    KeyValues out(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto m = axes[a].values.size();
      out[a] = {axes[a].name, axes[a].values[i % m]};
      i /= m;
    }
    return out;
  }

  Hyperparams hyperparams(std::size_t i) const {
    auto hp = default_hyperparams(kind);
    for (const auto& [k, v] : candidate(i)) set_hyperparam(hp, k, v);
    validate_hyperparams(hp);
    return hp;
  }

  /// Axes from key=value text: repeated keys form one axis, values in file
  /// order; axis order is first appearance. A "model" key must match the kind.
  static ParamGrid from_key_values(ModelKind kind, const KeyValues& kv) {
    ParamGrid g{kind, {}};
    for (const auto& [k, v] : kv) {
      if (k == "model") {
        if (parse_kind(v) != kind) throw ConfigError("grid file is for model " + v + ", not " + to_string(kind));
        continue;
      }
      auto it = std::find_if(g.axes.begin(), g.axes.end(), [&](const ParamAxis& a) { return a.name == k; });
      // Comma separated values on one line are also accepted.
      std::vector<std::string> values;
      for (const auto& tok : split(v, ',')) values.emplace_back(trim(tok));
      if (it == g.axes.end()) {
        g.axes.push_back({k, values});
      } else {
        it->values.insert(it->values.end(), values.begin(), values.end());
      }
    }
    if (g.axes.empty()) throw ConfigError("grid file defines no axes");
    g.validate();
    return g;
  }

  static ParamGrid default_for(ModelKind kind) {
    ParamGrid g{kind, {}};
    switch (kind) {
      case ModelKind::logreg:
        g.axes = {{"lambda", {"0.0001", "0.001", "0.01", "0.1", "1"}}, {"learning_rate", {"0.01", "0.1", "0.5"}}};
        break;
      case ModelKind::knn: {
        ParamAxis k{"k", {}};
        for (int v = 1; v <= 30; ++v) k.values.push_back(std::to_string(v));
        g.axes = {k, {"metric", {"euclidean", "manhattan"}}, {"weighting", {"uniform", "inverse_distance"}}};
        break;
      }
      case ModelKind::svm:
        g.axes = {{"C", {"0.1", "1", "10", "100"}},
                  {"gamma", {"0.001", "0.01", "0.1", "1"}},
                  {"kernel", {"linear", "rbf"}}};
        break;
      case ModelKind::mlp:
        g.axes = {{"dropout", {"0.2", "0.5"}}, {"learning_rate", {"0.0005", "0.001"}}};
        break;
    }
    return g;
  }
};

struct CvConfig {
  int folds = 5;
  bool stratified = true;
  std::uint64_t seed = 42;
  bool standardize = true;
  unsigned threads = 1;
  bool fail_on_warning = false;  // treat training notes (e.g. SVM non-convergence) as failures

  void validate(std::size_t rows) const {
    if (folds < 2) throw ConfigError("folds must be >= 2, got " + std::to_string(folds));
    if (static_cast<std::size_t>(folds) > rows) {
      throw ConfigError("folds (" + std::to_string(folds) + ") exceed row count (" + std::to_string(rows) + ")");
    }
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

/// Disjoint folds covering every index, each sorted ascending. Stratified
/// folds deal each shuffled class round-robin, continuing where the previous
/// class stopped, so per-class and total fold sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold_indices(std::span<const int> labels, const CvConfig& cfg) {
  cfg.validate(labels.size());
  const auto k = static_cast<std::size_t>(cfg.folds);
  Rng rng(derive_seed(cfg.seed, {0x6b666f6c64ULL}));
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  auto deal = [&](std::vector<std::size_t>& idx) {
    rng.shuffle(std::span(idx));
    for (auto i : idx) {
      folds[next].push_back(i);
      next = (next + 1) % k;
    }
  };
  if (cfg.stratified) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != 0 && labels[i] != 1) throw DomainError("non-binary label at row " + std::to_string(i));
      by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < 2; ++c) {
      if (by_class[c].size() < k) {
        throw StratificationError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                                  " rows, fewer than " + std::to_string(k) + " folds");
      }
    }
    for (auto& idx : by_class) deal(idx);
  } else {
    std::vector<std::size_t> idx(labels.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    deal(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

struct FoldScore {
  double accuracy = 0.0;
  MetricReport metrics;
};

struct CandidateResult {
  KeyValues params;
  std::vector<double> fold_scores;  // accuracy per fold
  double mean_score = 0.0;
  double std_score = 0.0;  // population standard deviation over folds
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  bool failed = false;
  std::string failure;
  std::vector<std::string> notes;
};

struct GridSearchResult {
  ModelKind kind = ModelKind::knn;
  std::vector<std::string> axis_names;
  int folds = 0;
  std::vector<CandidateResult> candidates;
  std::size_t best_index = 0;
  double best_mean_score = 0.0;

  const CandidateResult& best() const { return candidates.at(best_index); }
};

/// Train on `train_rows` of `data`, score accuracy on `test_rows`.
inline FoldScore evaluate_fold(const ClassifierSpec& spec, const Dataset& data, std::span<const std::size_t> train_rows,
                               std::span<const std::size_t> test_rows, std::vector<std::string>* notes = nullptr) {
  const auto train_set = data.subset(train_rows);
  const auto test_set = data.subset(test_rows);
  const auto model = train(spec, train_set);
  if (notes) *notes = model.meta.notes;
  Labels pred;
  pred.reserve(test_set.size());
  for (const auto& p : model.predict_all(test_set)) pred.push_back(p.label);
  FoldScore s;
  s.metrics = compute_metrics(confusion(test_set.target, pred));
  s.accuracy = s.metrics.accuracy;
  return s;
}

inline GridSearchResult grid_search(const ParamGrid& grid, const Dataset& data, const CvConfig& cfg) {
  grid.validate();
  const auto folds = kfold_indices(data.target, cfg);
  const auto n_cand = grid.size();
  const auto k = folds.size();

  std::vector<std::vector<std::size_t>> train_rows(k);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) train_rows[f].insert(train_rows[f].end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_rows[f].begin(), train_rows[f].end());
  }

  struct JobOutcome {
    std::optional<FoldScore> score;
    std::string error;
    std::vector<std::string> notes;
  };
  std::vector<JobOutcome> outcomes(n_cand * k);
  auto run_job = [&](std::size_t job) {
    const auto c = job / k, f = job % k;
    auto& out = outcomes[job];
    try {
      ClassifierSpec spec{grid.kind, grid.hyperparams(c), derive_seed(cfg.seed, {c, f}), cfg.standardize};
      out.score = evaluate_fold(spec, data, train_rows[f], folds[f], &out.notes);
      if (cfg.fail_on_warning && !out.notes.empty()) {
        out.score.reset();
        out.error = out.notes.front();
      }
    } catch (const Error& e) {
      out.error = e.what();
    }
  };

  const auto total = outcomes.size();
  const auto workers = std::min<std::size_t>(cfg.threads, total);
  if (workers <= 1) {
    for (std::size_t j = 0; j < total; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> crashes(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t j; (j = next.fetch_add(1)) < total;) run_job(j);
        } catch (...) {
          crashes[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : crashes) {
      if (e) std::rethrow_exception(e);
    }
  }

  GridSearchResult r;
  r.kind = grid.kind;
  r.folds = static_cast<int>(k);
  for (const auto& a : grid.axes) r.axis_names.push_back(a.name);
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < n_cand; ++c) {
    CandidateResult cr;
    cr.params = grid.candidate(c);
    for (std::size_t f = 0; f < k; ++f) {
      const auto& o = outcomes[c * k + f];
      for (const auto& n : o.notes) {
        if (std::find(cr.notes.begin(), cr.notes.end(), n) == cr.notes.end()) cr.notes.push_back(n);
      }
      if (!o.score) {
        if (!cr.failed) cr.failure = "fold " + std::to_string(f + 1) + ": " + o.error;
        cr.failed = true;
        continue;
      }
      cr.fold_scores.push_back(o.score->accuracy);
      cr.mean_precision += o.score->metrics.precision;
      cr.mean_recall += o.score->metrics.recall;
      cr.mean_f1 += o.score->metrics.f1;
    }
    if (!cr.failed) {
      const double kk = static_cast<double>(k);
      double sum = 0.0;
      for (double s : cr.fold_scores) sum += s;
      cr.mean_score = sum / kk;
      double ss = 0.0;
      for (double s : cr.fold_scores) ss += (s - cr.mean_score) * (s - cr.mean_score);
      cr.std_score = std::sqrt(ss / kk);
      cr.mean_precision /= kk;
      cr.mean_recall /= kk;
      cr.mean_f1 /= kk;
      if (!best || cr.mean_score > r.candidates[*best].mean_score) best = c;
    } else {
      cr.fold_scores.clear();
      cr.mean_precision = cr.mean_recall = cr.mean_f1 = 0.0;
    }
    r.candidates.push_back(std::move(cr));
  }
  if (!best) throw TrainingError("grid search: every candidate failed (" + r.candidates.front().failure + ")");
  r.best_index = *best;
  r.best_mean_score = r.candidates[*best].mean_score;
  return r;
}

/// One row per candidate, in grid order.
inline std::string grid_result_csv(const GridSearchResult& r) {
  std::string s = "candidate";
  for (const auto& a : r.axis_names) s += "," + a;
  s += ",mean_accuracy,std_accuracy";
  for (int f = 1; f <= r.folds; ++f) s += ",fold_" + std::to_string(f);
  s += ",mean_precision,mean_recall,mean_f1,status,best\n";
  for (std::size_t c = 0; c < r.candidates.size(); ++c) {
    const auto& cr = r.candidates[c];
    s += std::to_string(c);
    for (const auto& [k, v] : cr.params) s += "," + v;
    if (cr.failed) {
      s += ",,";
      for (int f = 0; f < r.folds; ++f) s += ",";
      s += ",,,failed,0\n";
      continue;
    }
    s += "," + format_double(cr.mean_score) + "," + format_double(cr.std_score);
    for (double v : cr.fold_scores) s += "," + format_double(v);
    s += "," + format_double(cr.mean_precision) + "," + format_double(cr.mean_recall) + "," + format_double(cr.mean_f1);
    s += cr.notes.empty() ? ",ok" : ",warning";
    s += c == r.best_index ? ",1\n" : ",0\n";
  }
  return s;
}

}  // namespace cardio
