#include <gtest/gtest.h>

#include "cardio/report.hpp"
#include "fixtures.hpp"

using namespace cardio;

namespace {

std::vector<EvaluationRecord> records() {
  EvaluationRecord a{"Logistic Regression", compute_metrics(ConfusionMatrix{40, 10, 8, 30}), ConfusionMatrix{40, 10, 8, 30}};
  a.metrics.auc = 0.9;
  EvaluationRecord b{"K-Nearest Neighbors", compute_metrics(ConfusionMatrix{45, 5, 3, 35}), ConfusionMatrix{45, 5, 3, 35}};
  return {a, b};
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Comparison, CsvRowsAndValues) {
  const auto csv = comparison_csv(records());
  const auto t = parse_table(csv);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "Logistic Regression");
  EXPECT_DOUBLE_EQ(parse_double(t.rows[1][t.column("accuracy")], "a"), 80.0 / 88.0);
  EXPECT_EQ(t.rows[1][t.column("auc")], "");
}

TEST(Comparison, SvgReflectsCsv) {
  const auto csv = comparison_csv(records());
  const auto svg = comparison_svg(csv);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("K-Nearest Neighbors"), std::string::npos);
  // Four metric bars per algorithm.
  const auto t = parse_table(csv);
  EXPECT_GE(count(svg, "<rect"), 4 * t.rows.size());
  EXPECT_EQ(comparison_svg(csv), svg);
}

TEST(Confusion, CsvAndSvg) {
  const auto csv = confusion_csv(records());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "algorithm,tp,fp,fn,tn");
  const auto t = parse_table(csv);
  EXPECT_EQ(t.rows[1], (std::vector<std::string>{"K-Nearest Neighbors", "45", "5", "3", "35"}));
  const auto svg = confusion_svg(csv);
  for (const char* v : {">45<", ">5<", ">3<", ">35<"}) EXPECT_NE(svg.find(v), std::string::npos) << v;
}

TEST(Correlation, SymmetricTableAndUnitDiagonal) {
  const auto s = summarize(fixture::random_dataset(200, 51));
  const auto t = parse_table(correlation_csv(s));
  const auto n = t.rows.size();
  ASSERT_EQ(t.header.size(), n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(t.rows[i][0], t.header[i + 1]);
    EXPECT_NEAR(parse_double(t.rows[i][i + 1], "d"), 1.0, 1e-12);
    for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(t.rows[i][j + 1], t.rows[j][i + 1]);
  }
  const auto svg = correlation_svg(correlation_csv(s));
  EXPECT_GE(count(svg, "<rect"), n * n);
}

TEST(Correlation, ConstantColumnLeavesEmptyCells) {
  auto d = fixture::random_dataset(50, 52);
  for (std::size_t r = 0; r < d.size(); ++r) d.features(r, col::cholesterol) = 200;
  const auto s = summarize(d);
  const auto csv = correlation_csv(s);
  EXPECT_NE(csv.find(",,"), std::string::npos);
  EXPECT_NO_THROW(correlation_svg(csv));
}

TEST(Frequency, CountsAddUp) {
  const auto d = fixture::random_dataset(150, 53);
  const auto t = parse_table(frequency_csv(summarize(d)));
  ASSERT_EQ(t.rows.size(), 4u);
  std::size_t total = 0, positives = 0;
  for (const auto& row : t.rows) {
    const auto c = static_cast<std::size_t>(parse_int(row[2], "count"));
    total += c;
    if (row[1] == "1") positives += c;
  }
  EXPECT_EQ(total, d.size());
  EXPECT_EQ(positives, static_cast<std::size_t>(std::count(d.target.begin(), d.target.end(), 1)));
  EXPECT_NE(frequency_svg(frequency_csv(summarize(d))).find("male (1)"), std::string::npos);
}

TEST(Svg, EscapesMarkup) { EXPECT_EQ(svg::escape("a<b&\"c\">"), "a&lt;b&amp;&quot;c&quot;&gt;"); }

TEST(Manifest, Text) {
  RunManifest m{"train", "data.csv", 7, "", "out", "0.1.0", "unspecified", {"knn.model", "manifest-train-knn.txt"}};
  EXPECT_EQ(m.text(),
            "command=train\ndata=data.csv\nseed=7\nspec=\nout=out\nversion=0.1.0\ntimestamp=unspecified\n"
            "output=knn.model\noutput=manifest-train-knn.txt\n");
}
