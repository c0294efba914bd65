#pragma once

// The 12-column heart-disease table: schema, CSV ingestion, validation and
// descriptive summaries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cardio/error.hpp"
#include "cardio/matrix.hpp"
#include "cardio/text.hpp"

namespace cardio {

enum class ColumnKind { numeric, nominal };

struct ColumnSpec {
  std::string name;
  ColumnKind kind;
  std::vector<int> domain;  // allowed levels, nominal columns only
  std::string units;

  bool allows(double v) const {
    for (int d : domain) {
      if (v == static_cast<double>(d)) return true;
    }
    return false;
  }
};

/// Canonical column positions. The target is always last.
namespace col {
inline constexpr std::size_t age = 0;
inline constexpr std::size_t sex = 1;
inline constexpr std::size_t chest_pain = 2;
inline constexpr std::size_t resting_bp = 3;
inline constexpr std::size_t cholesterol = 4;
inline constexpr std::size_t fasting_sugar = 5;
inline constexpr std::size_t resting_ecg = 6;
inline constexpr std::size_t max_heart_rate = 7;
inline constexpr std::size_t exercise_angina = 8;
inline constexpr std::size_t oldpeak = 9;
inline constexpr std::size_t st_slope = 10;
inline constexpr std::size_t target = 11;
}  // namespace col

inline constexpr std::size_t kFeatureCount = 11;
inline constexpr std::size_t kColumnCount = 12;

class FeatureSchema {
 public:
  static const FeatureSchema& heart() {
    static const FeatureSchema schema{{{
        {"age", ColumnKind::numeric, {}, "years"},
        {"sex", ColumnKind::nominal, {0, 1}, "1 = male, 0 = female"},
        {"chest pain type", ColumnKind::nominal, {1, 2, 3, 4}, "1 typical angina, 2 atypical, 3 non-anginal, 4 asymptomatic"},
        {"resting bp s", ColumnKind::numeric, {}, "mm Hg"},
        {"cholesterol", ColumnKind::numeric, {}, "mg/dl"},
        {"fasting blood sugar", ColumnKind::nominal, {0, 1}, "1 = above 120 mg/dl"},
        {"resting ecg", ColumnKind::nominal, {0, 1, 2}, "0 normal, 1 ST-T abnormality, 2 LV hypertrophy"},
        {"max heart rate", ColumnKind::numeric, {}, "beats per minute"},
        {"exercise angina", ColumnKind::nominal, {0, 1}, "1 = yes"},
        {"oldpeak", ColumnKind::numeric, {}, "ST depression"},
        {"ST slope", ColumnKind::nominal, {0, 1, 2, 3}, "0 normal, 1 upsloping, 2 flat, 3 downsloping"},
        {"target", ColumnKind::nominal, {0, 1}, "1 = at heart risk"},
    }}};
    return schema;
  }

  const std::array<ColumnSpec, kColumnCount>& columns() const { return columns_; }
  const ColumnSpec& column(std::size_t i) const { return columns_[i]; }
  const ColumnSpec& target() const { return columns_[col::target]; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < kColumnCount; ++i) {
      if (columns_[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::vector<std::size_t> numeric_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (columns_[i].kind == ColumnKind::numeric) out.push_back(i);
    }
    return out;
  }

  /// Stable text description; its CRC-32 identifies the schema inside model artifacts.
  std::string describe() const {
    std::string s;
    for (const auto& c : columns_) {
      s += c.name;
      s += c.kind == ColumnKind::numeric ? ":numeric" : ":nominal";
      for (int d : c.domain) s += "," + std::to_string(d);
      s += ";";
    }
    return s;
  }

  std::string fingerprint() const { return hex32(crc32(describe())); }

 private:
  explicit FeatureSchema(std::array<ColumnSpec, kColumnCount> cols) : columns_(std::move(cols)) {}
  std::array<ColumnSpec, kColumnCount> columns_;
};

/// Alternative header spellings accepted out of the box (the capitalized
/// variants used in clinical write-ups of the same table).
inline std::map<std::string, std::string> default_header_aliases() {
  return {
      {"Age", "age"},
      {"Sex", "sex"},
      {"Chest pain type", "chest pain type"},
      {"Resting BP", "resting bp s"},
      {"resting bp", "resting bp s"},
      {"Cholesterol", "cholesterol"},
      {"Fasting blood sugar", "fasting blood sugar"},
      {"Resting ECG", "resting ecg"},
      {"Max Heart rate", "max heart rate"},
      {"Exercise angina", "exercise angina"},
      {"Old peak", "oldpeak"},
      {"ST slope", "ST slope"},
      {"Target", "target"},
  };
}

struct Provenance {
  std::string source;
  std::size_t rows = 0;
  std::string content_crc;  // CRC-32 of the source bytes, empty if built in memory
};

struct Dataset {
  Matrix features;  // n x 11, canonical column order
  Labels target;
  Provenance provenance;

  std::size_t size() const { return target.size(); }
  const FeatureSchema& schema() const { return FeatureSchema::heart(); }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.features = features.select_rows(rows);
    out.target = select(target, rows);
    out.provenance = provenance;
    out.provenance.rows = rows.size();
    return out;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.features == b.features && a.target == b.target;
  }
};

/// Parse CSV text. `header_map` renames external headers to canonical names
/// before the schema check.
inline Dataset parse_csv(std::string_view text, std::string_view source,
                         const std::map<std::string, std::string>& header_map = default_header_aliases()) {
  const auto& schema = FeatureSchema::heart();
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw EmptyInputError(std::string(source) + ": no header row");

  std::string header_line(trim(lines.front()));
  if (header_line.rfind("\xEF\xBB\xBF", 0) == 0) header_line.erase(0, 3);
  const auto headers = split(header_line, ',');
  std::array<std::optional<std::size_t>, kColumnCount> position{};
  for (std::size_t i = 0; i < headers.size(); ++i) {
    std::string name(trim(headers[i]));
    if (auto it = header_map.find(name); it != header_map.end()) name = it->second;
    const auto idx = schema.index_of(name);
    if (!idx) throw SchemaError(std::string(source) + ": unknown column '" + name + "'");
    if (position[*idx]) throw SchemaError(std::string(source) + ": duplicate column '" + name + "'");
    position[*idx] = i;
  }
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    if (!position[c]) throw SchemaError(std::string(source) + ": missing column '" + schema.column(c).name + "'");
  }

  Dataset d;
  d.features = Matrix(0, kFeatureCount);
  std::array<double, kFeatureCount> row{};
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto line = trim(lines[li]);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    const auto row_no = li;  // 1-based data row == line index
    if (cells.size() != headers.size()) {
      throw ParseError(std::string(source) + ": row " + std::to_string(row_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " + std::to_string(headers.size()));
    }
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      const auto cell = trim(cells[*position[c]]);
      const auto where = std::string(source) + ": row " + std::to_string(row_no) + ", column '" +
                         schema.column(c).name + "'";
      if (cell.empty()) throw ParseError(where + ": missing value");
      if (c == col::target) {
        d.target.push_back(static_cast<int>(parse_int(cell, where)));
      } else {
        row[c] = parse_double(cell, where);
      }
    }
    d.features.append_row(row);
  }
  if (d.target.empty()) throw EmptyInputError(std::string(source) + ": header present but no data rows");
  d.provenance = {std::string(source), d.target.size(), hex32(crc32(text))};
  return d;
}

inline Dataset load_csv(const std::string& path,
                        const std::map<std::string, std::string>& header_map = default_header_aliases()) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const ParseError&) {
    throw SchemaError("cannot read data file: " + path);
  }
  return parse_csv(text, path, header_map);
}

/// Serialize with canonical headers; numbers use shortest round-trip form.
inline std::string to_csv(const Dataset& d) {
  const auto& schema = d.schema();
  std::string out = join(schema.columns(), ",", [](const ColumnSpec& c) { return c.name; }) + "\n";
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      out += format_double(d.features(r, c));
      out += ',';
    }
    out += std::to_string(d.target[r]);
    out += '\n';
  }
  return out;
}

struct RowError {
  std::size_t row;  // 0-based data row
  std::string column;
  double value;
  std::string rule;
};

struct ValidationReport {
  std::vector<RowError> row_errors;
  std::vector<std::string> warnings;
  bool is_valid() const { return row_errors.empty(); }
};

inline std::string describe_domain(const ColumnSpec& c) {
  return "{" + join(c.domain, ",", [](int v) { return std::to_string(v); }) + "}";
}

inline ValidationReport validate(const Dataset& d) {
  const auto& schema = d.schema();
  ValidationReport rep;
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const auto& spec = schema.column(c);
      const double v = d.features(r, c);
      if (!std::isfinite(v)) {
        rep.row_errors.push_back({r, spec.name, v, "value must be finite"});
      } else if (spec.kind == ColumnKind::nominal && !spec.allows(v)) {
        rep.row_errors.push_back({r, spec.name, v, "not in domain " + describe_domain(spec)});
      }
    }
    const double t = d.target[r];
    if (!schema.target().allows(t)) {
      rep.row_errors.push_back({r, schema.target().name, t, "not in domain " + describe_domain(schema.target())});
    }
    if (d.features(r, col::cholesterol) == 0.0) {
      rep.warnings.push_back("row " + std::to_string(r) + ": cholesterol is 0");
    }
    if (d.features(r, col::resting_bp) == 0.0) {
      rep.warnings.push_back("row " + std::to_string(r) + ": resting bp s is 0");
    }
  }
  return rep;
}

/// Throws DomainError describing the first violation, if any.
inline void require_valid(const Dataset& d) {
  const auto rep = validate(d);
  if (!rep.is_valid()) {
    const auto& e = rep.row_errors.front();
    throw DomainError("row " + std::to_string(e.row) + ", column '" + e.column + "': value " +
                      format_double(e.value) + " " + e.rule + " (" + std::to_string(rep.row_errors.size()) +
                      " invalid cell(s))");
  }
}

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
};

struct NumericSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  Histogram histogram;
};

struct NominalSummary {
  std::string name;
  std::vector<std::pair<int, std::size_t>> levels;  // every domain level, in domain order
};

struct SummaryStats {
  std::vector<NumericSummary> numeric;
  std::vector<NominalSummary> nominal;
  std::array<std::size_t, 2> class_counts{};            // [negative, positive]
  std::array<std::array<std::size_t, 2>, 2> sex_by_target{};  // [sex][target]
  std::vector<std::string> correlation_names;
  /// Pearson correlations; nullopt marks an undefined entry (zero-variance column).
  std::vector<std::vector<std::optional<double>>> correlation;
};

inline constexpr std::size_t kHistogramBins = 20;

inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

inline SummaryStats summarize(const Dataset& d) {
  if (d.size() < 2) throw InsufficientDataError("summary needs at least 2 rows, got " + std::to_string(d.size()));
  const auto& schema = d.schema();
  const auto n = d.size();
  SummaryStats s;

  std::vector<std::vector<double>> numeric_values;
  for (auto c : schema.numeric_columns()) {
    std::vector<double> v(n);
    for (std::size_t r = 0; r < n; ++r) v[r] = d.features(r, c);
    NumericSummary ns;
    ns.name = schema.column(c).name;
    ns.min = *std::min_element(v.begin(), v.end());
    ns.max = *std::max_element(v.begin(), v.end());
    for (double x : v) ns.mean += x;
    ns.mean /= static_cast<double>(n);
    for (double x : v) ns.std += (x - ns.mean) * (x - ns.mean);
    ns.std = std::sqrt(ns.std / static_cast<double>(n));
    ns.histogram = {ns.min, ns.max, std::vector<std::size_t>(kHistogramBins, 0)};
    const double width = (ns.max - ns.min) / static_cast<double>(kHistogramBins);
    for (double x : v) {
      std::size_t bin = 0;
      if (width > 0.0) bin = std::min(kHistogramBins - 1, static_cast<std::size_t>((x - ns.min) / width));
      ++ns.histogram.counts[bin];
    }
    s.numeric.push_back(std::move(ns));
    s.correlation_names.push_back(schema.column(c).name);
    numeric_values.push_back(std::move(v));
  }

  for (std::size_t c = 0; c < kColumnCount; ++c) {
    const auto& spec = schema.column(c);
    if (spec.kind != ColumnKind::nominal) continue;
    NominalSummary ns{spec.name, {}};
    for (int level : spec.domain) {
      std::size_t count = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const double v = c == col::target ? d.target[r] : d.features(r, c);
        if (v == level) ++count;
      }
      ns.levels.emplace_back(level, count);
    }
    s.nominal.push_back(std::move(ns));
  }

  for (std::size_t r = 0; r < n; ++r) {
    const int t = d.target[r];
    const int sex = static_cast<int>(d.features(r, col::sex));
    if (t == 0 || t == 1) {
      ++s.class_counts[static_cast<std::size_t>(t)];
      if (sex == 0 || sex == 1) ++s.sex_by_target[static_cast<std::size_t>(sex)][static_cast<std::size_t>(t)];
    }
  }

  const auto m = numeric_values.size();
  s.correlation.assign(m, std::vector<std::optional<double>>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const bool defined = pearson(numeric_values[i], numeric_values[i]).has_value();
    s.correlation[i][i] = defined ? std::optional<double>(1.0) : std::nullopt;
    for (std::size_t j = i + 1; j < m; ++j) {
      s.correlation[i][j] = s.correlation[j][i] = pearson(numeric_values[i], numeric_values[j]);
    }
  }
  return s;
}

}  // namespace cardio
