// cardio: train, tune, evaluate, predict and report from the command line.
//
// Exit codes: 0 success, 2 bad flags or configuration, 3 data / schema /
// artifact problem, 4 training failure.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cardio/cardio.hpp"

namespace fs = std::filesystem;
using namespace cardio;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case Error::Category::config: return kExitConfig;
    case Error::Category::data: return kExitData;
    case Error::Category::artifact: return kExitData;
    case Error::Category::training: return kExitTraining;
  }
  return 1;
}

std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

Dataset load_valid(const std::string& path) {
  auto d = load_csv(path);
  const auto rep = validate(d);
  if (!rep.is_valid()) require_valid(d);
  if (!rep.warnings.empty()) {
    std::cerr << "warning: " << rep.warnings.size() << " suspicious value(s), first: " << rep.warnings.front() << "\n";
  }
  return d;
}

void write_manifest(RunManifest m, const std::string& name) {
  m.toolkit_version = kVersion;
  m.timestamp = artifact_timestamp();
  write_file(out_path(m.output_dir, name), m.text());
}

// Spec and grid files are configuration: unreadable or malformed ones exit 2.
KeyValues read_config(const std::string& path) {
  try {
    return parse_key_values(read_file(path), path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

struct Common {
  std::string data;
  std::string model;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::uint64_t resolved_seed() const { return seed ? *seed : default_seed(); }
};

int cmd_train(const Common& c, const std::string& spec_file, double fraction, bool no_standardize) {
  const auto kind = parse_kind(c.model);
  const auto seed = c.resolved_seed();
  ClassifierSpec spec = ClassifierSpec::defaults(kind, seed);
  if (!spec_file.empty()) {
    const auto kv = read_config(spec_file);
    spec = ClassifierSpec::from_key_values(kv, kind);
    // A seed in the spec file sets only the training seed; --seed always drives the split.
    const bool has_seed = std::any_of(kv.begin(), kv.end(), [](const auto& p) { return p.first == "seed"; });
    if (!has_seed) spec.seed = seed;
  }
  if (no_standardize) spec.standardize = false;
  const auto data = load_valid(c.data);
  ensure_dir(c.out);

  const auto result = train_on_split(spec, data, SplitConfig{fraction, seed, true});
  for (const auto& n : result.model.meta.notes) std::cerr << "warning: " << n << "\n";
  const auto artifact = std::string(to_string(kind)) + ".model";
  save_model(result.model, out_path(c.out, artifact));
  std::cout << "model=" << to_string(kind) << " train_accuracy=" << format_double(result.train_accuracy)
            << " test_accuracy=" << format_double(result.test_accuracy) << "\n";
  write_manifest({"train", c.data, seed, spec_file, c.out, "", "", {artifact}},
                 std::string("manifest-train-") + to_string(kind) + ".txt");
  return kExitOk;
}

int cmd_tune(const Common& c, const std::string& grid_file, int folds, unsigned threads, bool strict) {
  const auto kind = parse_kind(c.model);
  const auto seed = c.resolved_seed();
  CvConfig cv;
  cv.folds = folds;
  cv.seed = seed;
  cv.threads = threads;
  cv.fail_on_warning = strict;
  if (folds < 2) throw ConfigError("--folds must be >= 2, got " + std::to_string(folds));
  const auto grid = grid_file.empty() ? ParamGrid::default_for(kind)
                                      : ParamGrid::from_key_values(kind, read_config(grid_file));
  grid.validate();
  const auto data = load_valid(c.data);
  ensure_dir(c.out);

  const auto result = tune_on_split(grid, data, SplitConfig{0.8, seed, true}, cv);
  const auto name = std::string(to_string(kind));
  save_model(result.final.model, out_path(c.out, name + ".model"));
  write_file(out_path(c.out, name + "_grid.csv"), grid_result_csv(result.search));
  std::cout << "model=" << name << " candidates=" << result.search.candidates.size() << " best=";
  bool first = true;
  for (const auto& [k, v] : result.search.best().params) {
    std::cout << (first ? "" : ",") << k << "=" << v;
    first = false;
  }
  std::cout << " cv_accuracy=" << format_double(result.search.best_mean_score)
            << " test_accuracy=" << format_double(result.final.test_accuracy) << "\n";
  write_manifest({"tune", c.data, seed, grid_file, c.out, "", "", {name + ".model", name + "_grid.csv"}},
                 "manifest-tune-" + name + ".txt");
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& split, double threshold) {
  if (split != "test" && split != "all") throw ConfigError("--split must be test or all");
  const auto model = load_model(c.model);
  const auto data = load_valid(c.data);
  ensure_dir(c.out);
  const auto r = evaluate_model(model, data, split == "test" ? EvalSplit::test : EvalSplit::all, c.seed, threshold);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  const auto name = std::string(to_string(model.kind));
  const auto metrics = comparison_csv({r.record});
  const auto conf = confusion_csv({r.record});
  write_file(out_path(c.out, "metrics-" + name + ".csv"), metrics);
  write_file(out_path(c.out, "confusion-" + name + ".csv"), conf);
  std::cout << metrics << conf;
  write_manifest({"evaluate", c.data, c.seed ? *c.seed : model.meta.split.seed, c.model, c.out, "", "",
                  {"metrics-" + name + ".csv", "confusion-" + name + ".csv"}},
                 "manifest-evaluate-" + name + ".txt");
  return kExitOk;
}

KeyValues read_record_file(const std::string& path) {
  const auto text = read_file(path);
  const auto first_line = std::string(trim(text.substr(0, text.find('\n'))));
  if (first_line.find('=') != std::string::npos) return parse_key_values(text, path);
  // Header line plus exactly one data row.
  std::vector<std::string> lines;
  for (const auto& l : split(text, '\n')) {
    if (!trim(l).empty()) lines.emplace_back(trim(l));
  }
  if (lines.size() != 2) throw SchemaError(path + ": expected a header and exactly one record");
  const auto names = split(lines[0], ',');
  const auto values = split(lines[1], ',');
  if (names.size() != values.size()) throw SchemaError(path + ": header and record widths differ");
  KeyValues kv;
  for (std::size_t i = 0; i < names.size(); ++i) kv.emplace_back(std::string(trim(names[i])), std::string(trim(values[i])));
  return kv;
}

int cmd_predict(const std::string& model_path, const std::string& input, const std::vector<std::string>& pairs,
                double threshold) {
  if (input.empty() == pairs.empty()) throw ConfigError("give either --input FILE or inline key=value pairs");
  KeyValues record;
  if (!input.empty()) {
    record = read_record_file(input);
  } else {
    for (const auto& p : pairs) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + p + "'");
      record.emplace_back(std::string(trim(p.substr(0, eq))), std::string(trim(p.substr(eq + 1))));
    }
  }
  const auto model = load_model(model_path);
  const auto row = record_to_row(record);
  const auto out = model.predict(row, threshold);
  std::cout << "label=" << out.label << " score=" << format_double(out.score)
            << " threshold=" << format_double(threshold) << "\n";
  return kExitOk;
}

int cmd_report(const Common& c, const std::string& models_dir, const std::string& split) {
  if (split != "test" && split != "all") throw ConfigError("--split must be test or all");
  std::vector<std::string> paths;
  std::error_code ec;
  if (fs::is_directory(models_dir, ec)) {
    for (const auto& e : fs::directory_iterator(models_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".model") paths.push_back(e.path().string());
    }
  }
  if (paths.empty()) throw ConfigError("no .model files in " + models_dir);
  const auto data = load_valid(c.data);
  std::vector<std::pair<ModelKind, TrainedModel>> models;
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    auto m = load_model(p);
    models.emplace_back(m.kind, std::move(m));
  }
  std::stable_sort(models.begin(), models.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  ensure_dir(c.out);

  std::vector<EvaluationRecord> recs;
  for (const auto& [kind, m] : models) {
    const auto r = evaluate_model(m, data, split == "test" ? EvalSplit::test : EvalSplit::all, c.seed);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    recs.push_back(r.record);
  }
  const auto stats = summarize(data);
  const std::vector<std::pair<std::string, std::string>> tables{
      {"comparison", comparison_csv(recs)},
      {"confusion", confusion_csv(recs)},
      {"correlation", correlation_csv(stats)},
      {"frequency", frequency_csv(stats)},
  };
  std::vector<std::string> outputs;
  for (const auto& [name, csv] : tables) {
    write_file(out_path(c.out, name + ".csv"), csv);
    // Charts are drawn from the file just written, never from in-memory results.
    const auto twin = read_file(out_path(c.out, name + ".csv"));
    std::string chart;
    if (name == "comparison") chart = comparison_svg(twin);
    else if (name == "confusion") chart = confusion_svg(twin);
    else if (name == "correlation") chart = correlation_svg(twin);
    else chart = frequency_svg(twin);
    write_file(out_path(c.out, name + ".svg"), chart);
    outputs.push_back(name + ".csv");
    outputs.push_back(name + ".svg");
  }
  std::cout << tables.front().second;
  write_manifest({"report", c.data, c.seed.value_or(models.front().second.meta.split.seed), models_dir, c.out, "", "", outputs}, "manifest-report.txt");
  return kExitOk;
}

int cmd_summarize(const std::string& data_path) {
  const auto data = load_csv(data_path);
  const auto rep = validate(data);
  std::cout << "rows=" << data.size() << " positive=" << std::count(data.target.begin(), data.target.end(), 1)
            << " negative=" << std::count(data.target.begin(), data.target.end(), 0)
            << " invalid_cells=" << rep.row_errors.size() << " warnings=" << rep.warnings.size() << "\n";
  for (const auto& e : rep.row_errors) {
    std::cout << "invalid row=" << e.row << " column=" << e.column << " value=" << format_double(e.value) << " ("
              << e.rule << ")\n";
  }
  if (!rep.is_valid()) return kExitData;
  const auto s = summarize(data);
  for (const auto& n : s.numeric) {
    std::cout << n.name << ": mean=" << format_double(n.mean) << " std=" << format_double(n.std)
              << " min=" << format_double(n.min) << " max=" << format_double(n.max) << "\n";
  }
  for (const auto& n : s.nominal) {
    std::cout << n.name << ":";
    for (const auto& [level, count] : n.levels) std::cout << " " << level << "=" << count;
    std::cout << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heart-disease classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Random seed (default 42, or $CARDIO_SEED)");
  };

  auto* train = app.add_subcommand("train", "Split the data, train one model, write its artifact");
  std::string spec_file;
  double fraction = 0.8;
  bool no_standardize = false;
  train->add_option("--data", common.data, "Dataset CSV")->required();
  train->add_option("--model", common.model, "logreg | knn | svm | mlp")->required();
  train->add_option("--spec", spec_file, "Hyper-parameter file (key=value lines)");
  train->add_option("--train-fraction", fraction, "Training share of the split");
  train->add_flag("--no-standardize", no_standardize, "Skip z-scoring of numeric columns");
  train->add_option("--out", common.out, "Output directory");
  add_seed(train);

  auto* tune = app.add_subcommand("tune", "Cross-validated grid search, then refit the best candidate");
  std::string grid_file;
  int folds = 5;
  unsigned threads = 1;
  bool strict = false;
  tune->add_option("--data", common.data, "Dataset CSV")->required();
  tune->add_option("--model", common.model, "logreg | knn | svm | mlp")->required();
  tune->add_option("--grid", grid_file, "Grid file (repeated keys form axes)");
  tune->add_option("--folds", folds, "Cross-validation folds");
  tune->add_option("--threads", threads, "Worker threads (results do not depend on this)");
  tune->add_flag("--strict", strict, "Treat training warnings as candidate failures");
  tune->add_option("--out", common.out, "Output directory");
  add_seed(tune);

  auto* evaluate = app.add_subcommand("evaluate", "Metrics and confusion matrix for a model artifact");
  std::string split = "test";
  double threshold = kDefaultThreshold;
  evaluate->add_option("--model", common.model, "Model artifact")->required();
  evaluate->add_option("--data", common.data, "Dataset CSV")->required();
  evaluate->add_option("--split", split, "test | all");
  evaluate->add_option("--threshold", threshold, "Decision threshold");
  evaluate->add_option("--out", common.out, "Output directory");
  add_seed(evaluate);

  auto* predict = app.add_subcommand("predict", "Classify one record");
  std::string input;
  std::vector<std::string> pairs;
  double predict_threshold = kDefaultThreshold;
  predict->add_option("--model", common.model, "Model artifact")->required();
  predict->add_option("--input", input, "Record file: key=value lines, or a header plus one CSV row");
  predict->add_option("--threshold", predict_threshold, "Decision threshold");
  predict->add_option("pairs", pairs, "Inline key=value pairs");

  auto* report = app.add_subcommand("report", "Comparison, confusion, correlation and frequency charts");
  std::string models_dir;
  std::string report_split = "test";
  report->add_option("--data", common.data, "Dataset CSV")->required();
  report->add_option("--models", models_dir, "Directory of .model artifacts")->required();
  report->add_option("--split", report_split, "test | all");
  report->add_option("--out", common.out, "Output directory");
  add_seed(report);

  auto* summary = app.add_subcommand("summarize", "Validate a dataset and print summary statistics");
  std::string summary_data;
  summary->add_option("--data", summary_data, "Dataset CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(common, spec_file, fraction, no_standardize);
    if (*tune) return cmd_tune(common, grid_file, folds, threads, strict);
    if (*evaluate) return cmd_evaluate(common, split, threshold);
    if (*predict) return cmd_predict(common.model, input, pairs, predict_threshold);
    if (*report) return cmd_report(common, models_dir, report_split);
    if (*summary) return cmd_summarize(summary_data);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
