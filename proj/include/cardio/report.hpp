#pragma once

// Report tables (CSV) and the vector graphics drawn from them.
//
// Every chart function takes the CSV text of its twin table and nothing else,
// so a graphic can only show numbers that are in the table next to it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cardio/dataset.hpp"
#include "cardio/error.hpp"
#include "cardio/metrics.hpp"
#include "cardio/text.hpp"

namespace cardio {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaError("table lacks column '" + std::string(name) + "'");
  }
};

/// Plain comma-separated table without quoting (all report tables are of that form).
inline CsvTable parse_table(std::string_view text) {
  CsvTable t;
  bool first = true;
  for (const auto& raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size()) throw ParseError("table row width differs from header");
    t.rows.push_back(std::move(cells));
  }
  if (first) throw EmptyInputError("table is empty");
  return t;
}

struct EvaluationRecord {
  std::string algorithm;
  MetricReport metrics;
  ConfusionMatrix confusion;
};

inline std::string comparison_csv(const std::vector<EvaluationRecord>& recs) {
  std::string s = std::string(kMetricsCsvHeader) + "\n";
  for (const auto& r : recs) s += metrics_csv_row(r.algorithm, r.metrics) + "\n";
  return s;
}

inline constexpr const char* kConfusionCsvHeader = "algorithm,tp,fp,fn,tn";

inline std::string confusion_csv_row(const std::string& algorithm, const ConfusionMatrix& cm) {
  return algorithm + "," + std::to_string(cm.tp) + "," + std::to_string(cm.fp) + "," + std::to_string(cm.fn) + "," +
         std::to_string(cm.tn);
}

inline std::string confusion_csv(const std::vector<EvaluationRecord>& recs) {
  std::string s = std::string(kConfusionCsvHeader) + "\n";
  for (const auto& r : recs) s += confusion_csv_row(r.algorithm, r.confusion) + "\n";
  return s;
}

/// Square table; empty cells mark undefined correlations.
inline std::string correlation_csv(const SummaryStats& s) {
  std::string out = "feature";
  for (const auto& n : s.correlation_names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < s.correlation_names.size(); ++i) {
    out += s.correlation_names[i];
    for (const auto& v : s.correlation[i]) out += "," + (v ? format_double(*v) : std::string());
    out += "\n";
  }
  return out;
}

inline std::string frequency_csv(const SummaryStats& s) {
  std::string out = "sex,target,count\n";
  for (int sex = 0; sex < 2; ++sex) {
    for (int t = 0; t < 2; ++t) {
      out += std::to_string(sex) + "," + std::to_string(t) + "," +
             std::to_string(s.sex_by_target[static_cast<std::size_t>(sex)][static_cast<std::size_t>(t)]) + "\n";
    }
  }
  return out;
}

namespace svg {

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Fixed 2-decimal coordinates keep the bytes stable across platforms.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " +
         num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

inline std::string rect(double x, double y, double w, double h, std::string_view fill) {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"" + std::string(fill) + "\"/>\n";
}

inline std::string text(double x, double y, std::string_view s, std::string_view anchor = "middle") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) + "\">" + escape(s) +
         "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" stroke=\"black\"/>\n";
}

inline constexpr std::array<const char*, 5> kPalette{"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};

/// Blue (-1) through white (0) to red (+1).
inline std::string diverging(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const int a = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
  char buf[16];
  if (v >= 0) {
    std::snprintf(buf, sizeof buf, "#ff%02x%02x", a, a);
  } else {
    std::snprintf(buf, sizeof buf, "#%02x%02xff", a, a);
  }
  return buf;
}

}  // namespace svg

/// Grouped bars: one group per algorithm, one bar per metric column.
inline std::string comparison_svg(std::string_view csv) {
  const auto t = parse_table(csv);
  const std::vector<std::string> metrics{"accuracy", "precision", "recall", "f1"};
  std::vector<std::size_t> cols;
  for (const auto& m : metrics) cols.push_back(t.column(m));
  const auto algo = t.column("algorithm");

  const double left = 50, top = 30, plot_h = 240, bar_w = 18, gap = 30;
  const double group_w = bar_w * static_cast<double>(metrics.size()) + gap;
  const double width = left + group_w * static_cast<double>(std::max<std::size_t>(t.rows.size(), 1)) + 140;
  const double height = top + plot_h + 60;
  std::string s = svg::open(width, height);
  s += svg::text(width / 2, 18, "Performance metrics by algorithm");
  s += svg::line(left, top, left, top + plot_h);
  s += svg::line(left, top + plot_h, width - 140, top + plot_h);
  for (int tick = 0; tick <= 5; ++tick) {
    const double v = tick / 5.0;
    const double y = top + plot_h * (1.0 - v);
    s += svg::text(left - 6, y + 4, svg::num(v), "end");
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double gx = left + gap / 2 + group_w * static_cast<double>(r);
    for (std::size_t m = 0; m < cols.size(); ++m) {
      const double v = std::clamp(parse_double(t.rows[r][cols[m]], metrics[m]), 0.0, 1.0);
      const double h = plot_h * v;
      s += svg::rect(gx + bar_w * static_cast<double>(m), top + plot_h - h, bar_w - 2, h, svg::kPalette[m]);
    }
    s += svg::text(gx + bar_w * 2, top + plot_h + 16, t.rows[r][algo]);
  }
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const double ly = top + 20.0 * static_cast<double>(m);
    s += svg::rect(width - 130, ly, 12, 12, svg::kPalette[m]);
    s += svg::text(width - 112, ly + 10, metrics[m], "start");
  }
  s += "</svg>\n";
  return s;
}

/// One 2x2 block per algorithm, laid out on a two-column grid.
inline std::string confusion_svg(std::string_view csv) {
  const auto t = parse_table(csv);
  const auto algo = t.column("algorithm");
  const auto tp = t.column("tp"), fp = t.column("fp"), fn = t.column("fn"), tn = t.column("tn");
  const double cell = 60, block = 2 * cell + 90;
  const std::size_t per_row = 2;
  const auto n = t.rows.size();
  const auto grid_rows = (n + per_row - 1) / per_row;
  const double width = block * static_cast<double>(std::min(n, per_row)) + 20;
  const double height = (block + 20) * static_cast<double>(std::max<std::size_t>(grid_rows, 1)) + 10;
  std::string s = svg::open(width, height);
  for (std::size_t r = 0; r < n; ++r) {
    const double ox = 10 + block * static_cast<double>(r % per_row) + 60;
    const double oy = 10 + (block + 20) * static_cast<double>(r / per_row) + 40;
    const auto& row = t.rows[r];
    // Rows: actual 1, actual 0. Columns: predicted 1, predicted 0.
    const std::array<std::array<std::string, 2>, 2> cells{{{row[tp], row[fn]}, {row[fp], row[tn]}}};
    double total = 0;
    for (const auto& cr : cells) {
      for (const auto& c : cr) total += parse_double(c, "count");
    }
    s += svg::text(ox + cell, oy - 22, row[algo]);
    s += svg::text(ox + cell / 2, oy - 6, "pred 1");
    s += svg::text(ox + 1.5 * cell, oy - 6, "pred 0");
    s += svg::text(ox - 6, oy + cell / 2 + 4, "true 1", "end");
    s += svg::text(ox - 6, oy + 1.5 * cell + 4, "true 0", "end");
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double v = parse_double(cells[i][j], "count");
        const double shade = total > 0 ? v / total : 0.0;
        const double x = ox + cell * static_cast<double>(j), y = oy + cell * static_cast<double>(i);
        s += svg::rect(x, y, cell - 2, cell - 2, svg::diverging(i == j ? shade : -shade));
        s += svg::text(x + cell / 2, y + cell / 2 + 4, cells[i][j]);
      }
    }
  }
  s += "</svg>\n";
  return s;
}

inline std::string correlation_svg(std::string_view csv) {
  const auto t = parse_table(csv);
  const auto n = t.rows.size();
  const double cell = 28, left = 140, top = 140;
  const double size_w = left + cell * static_cast<double>(n) + 20;
  const double size_h = top + cell * static_cast<double>(n) + 20;
  std::string s = svg::open(size_w, size_h);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = left + cell * static_cast<double>(j) + cell / 2;
    s += "<text x=\"" + svg::num(x) + "\" y=\"" + svg::num(top - 6) + "\" transform=\"rotate(-60 " + svg::num(x) +
         " " + svg::num(top - 6) + ")\">" + svg::escape(t.header[j + 1]) + "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double y = top + cell * static_cast<double>(i);
    s += svg::text(left - 6, y + cell / 2 + 4, t.rows[i][0], "end");
    for (std::size_t j = 0; j < n; ++j) {
      const double x = left + cell * static_cast<double>(j);
      const auto& c = t.rows[i][j + 1];
      if (c.empty()) {
        s += svg::rect(x, y, cell - 1, cell - 1, "#cccccc");
        continue;
      }
      const double v = parse_double(c, "correlation");
      s += svg::rect(x, y, cell - 1, cell - 1, svg::diverging(v));
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.2f", v);
      s += "<text x=\"" + svg::num(x + cell / 2) + "\" y=\"" + svg::num(y + cell / 2 + 3) +
           "\" text-anchor=\"middle\" font-size=\"8\">" + buf + "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

/// Bars of patient counts by sex, split by target.
inline std::string frequency_svg(std::string_view csv) {
  const auto t = parse_table(csv);
  const auto sc = t.column("sex"), tc = t.column("target"), cc = t.column("count");
  double max_count = 1;
  for (const auto& r : t.rows) max_count = std::max(max_count, parse_double(r[cc], "count"));
  const double left = 60, top = 30, plot_h = 220, bar_w = 40, group_gap = 50;
  const double width = left + 2 * (2 * bar_w + group_gap) + 130, height = top + plot_h + 50;
  std::string s = svg::open(width, height);
  s += svg::text(width / 2, 18, "Patients by sex and target");
  s += svg::line(left, top, left, top + plot_h);
  s += svg::line(left, top + plot_h, width - 130, top + plot_h);
  for (const auto& r : t.rows) {
    const int sex = static_cast<int>(parse_int(r[sc], "sex"));
    const int target = static_cast<int>(parse_int(r[tc], "target"));
    const double v = parse_double(r[cc], "count");
    const double h = plot_h * v / max_count;
    const double x = left + group_gap / 2 + (2 * bar_w + group_gap) * sex + bar_w * target;
    s += svg::rect(x, top + plot_h - h, bar_w - 4, h, svg::kPalette[static_cast<std::size_t>(target)]);
    s += svg::text(x + bar_w / 2 - 2, top + plot_h - h - 4, r[cc]);
  }
  s += svg::text(left + group_gap / 2 + bar_w, top + plot_h + 18, "female (0)");
  s += svg::text(left + group_gap / 2 + (2 * bar_w + group_gap) + bar_w, top + plot_h + 18, "male (1)");
  for (int target = 0; target < 2; ++target) {
    const double ly = top + 20.0 * target;
    s += svg::rect(width - 120, ly, 12, 12, svg::kPalette[static_cast<std::size_t>(target)]);
    s += svg::text(width - 102, ly + 10, "target " + std::to_string(target), "start");
  }
  s += "</svg>\n";
  return s;
}

struct RunManifest {
  std::string command;
  std::string data_path;
  std::uint64_t seed = 42;
  std::string spec_file;  // spec or grid file, empty when defaults were used
  std::string output_dir;
  std::string toolkit_version;
  std::string timestamp;
  std::vector<std::string> outputs;

  std::string text() const {
    std::string s;
    s += "command=" + command + "\n";
    s += "data=" + data_path + "\n";
    s += "seed=" + std::to_string(seed) + "\n";
    s += "spec=" + spec_file + "\n";
    s += "out=" + output_dir + "\n";
    s += "version=" + toolkit_version + "\n";
    s += "timestamp=" + timestamp + "\n";
    for (const auto& o : outputs) s += "output=" + o + "\n";
    return s;
  }
};

}  // namespace cardio
