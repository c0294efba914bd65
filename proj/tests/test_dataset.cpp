#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cardio/dataset.hpp"
#include "fixtures.hpp"

using namespace cardio;

namespace {

std::string csv_with(const std::vector<std::string>& rows) {
  std::string s = std::string(fixture::kHeader) + "\n";
  for (const auto& r : rows) s += r + "\n";
  return s;
}

const std::string kRowA = "40,1,2,140,289,0,0,172,0,0,1,0";
const std::string kRowB = "49,0,3,160,180,0,0,156,0,1,2,1";

}  // namespace

TEST(Schema, TwelveColumnsTargetLast) {
  const auto& s = FeatureSchema::heart();
  EXPECT_EQ(s.columns().size(), 12u);
  EXPECT_EQ(s.column(11).name, "target");
  EXPECT_EQ(s.numeric_columns(), (std::vector<std::size_t>{0, 3, 4, 7, 9}));
  EXPECT_EQ(s.column(col::chest_pain).domain, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(s.column(col::st_slope).domain, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(s.fingerprint().size(), 8u);
}

TEST(ParseCsv, CanonicalHeader) {
  const auto d = parse_csv(csv_with({kRowA, kRowB}), "mem");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.features(0, col::cholesterol), 289);
  EXPECT_EQ(d.features(1, col::oldpeak), 1);
  EXPECT_EQ(d.target, (Labels{0, 1}));
  EXPECT_EQ(d.provenance.rows, 2u);
  EXPECT_EQ(d.provenance.content_crc.size(), 8u);
}

TEST(ParseCsv, HeaderOnlyIsEmptyInput) { EXPECT_THROW(parse_csv(csv_with({}), "mem"), EmptyInputError); }

TEST(ParseCsv, ReorderedAndAliasedHeaders) {
  const std::string text =
      "target,Age,Sex,Chest pain type,Resting BP,Cholesterol,Fasting blood sugar,Resting ECG,Max Heart rate,"
      "Exercise angina,oldpeak,ST slope\n1,40,1,2,140,289,0,0,172,0,0,1\n";
  const auto d = parse_csv(text, "mem");
  EXPECT_EQ(d.features(0, col::age), 40);
  EXPECT_EQ(d.features(0, col::st_slope), 1);
  EXPECT_EQ(d.target[0], 1);
}

TEST(ParseCsv, SchemaErrors) {
  EXPECT_THROW(parse_csv("age,sex\n1,2\n", "mem"), SchemaError);
  std::string dup = std::string(fixture::kHeader) + ",age\n";
  EXPECT_THROW(parse_csv(dup + kRowA + ",1\n", "mem"), SchemaError);
  std::string unknown = std::string(fixture::kHeader);
  unknown.replace(0, 3, "agee");
  EXPECT_THROW(parse_csv(unknown + "\n" + kRowA + "\n", "mem"), SchemaError);
}

TEST(ParseCsv, MissingCellIsParseError) {
  EXPECT_THROW(parse_csv(csv_with({"40,1,2,140,,0,0,172,0,0,1,0"}), "mem"), ParseError);
  EXPECT_THROW(parse_csv(csv_with({"40,1,2,140,289,0,0,172,0,0,1"}), "mem"), ParseError);
  EXPECT_THROW(parse_csv(csv_with({"40,1,2,140,abc,0,0,172,0,0,1,0"}), "mem"), ParseError);
}

TEST(LoadCsv, MissingFileNamesPath) {
  try {
    load_csv("/nonexistent/heart.csv");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/heart.csv"), std::string::npos);
  }
}

TEST(Validate, SexTwoLoadsButFailsValidation) {
  const auto d = parse_csv(csv_with({"40,2,2,140,289,0,0,172,0,0,1,0"}), "mem");
  const auto rep = validate(d);
  ASSERT_EQ(rep.row_errors.size(), 1u);
  EXPECT_EQ(rep.row_errors[0].column, "sex");
  EXPECT_NE(rep.row_errors[0].rule.find("{0,1}"), std::string::npos);
  EXPECT_THROW(require_valid(d), DomainError);
}

TEST(Validate, SingleChestPainViolation) {
  const auto d = parse_csv(csv_with({kRowA, "40,1,5,140,289,0,0,172,0,0,1,0", kRowB}), "mem");
  const auto rep = validate(d);
  ASSERT_EQ(rep.row_errors.size(), 1u);
  EXPECT_EQ(rep.row_errors[0].row, 1u);
  EXPECT_EQ(rep.row_errors[0].column, "chest pain type");
}

TEST(Validate, CleanDatasetHasNoWarnings) {
  const auto rep = validate(parse_csv(csv_with({kRowA, kRowB}), "mem"));
  EXPECT_TRUE(rep.is_valid());
  EXPECT_TRUE(rep.warnings.empty());
}

TEST(Validate, ZeroCholesterolWarnsOnly) {
  const auto rep = validate(parse_csv(csv_with({"40,1,2,140,0,0,0,172,0,0,1,0", kRowB}), "mem"));
  EXPECT_TRUE(rep.is_valid());
  EXPECT_EQ(rep.warnings.size(), 1u);
}

TEST(Validate, MatchesPerCellScan) {
  std::mt19937_64 g(9);
  auto d = fixture::random_dataset(200, 3);
  // Corrupt random cells, some in domain and some not.
  for (int k = 0; k < 60; ++k) {
    const auto r = std::uniform_int_distribution<std::size_t>(0, 199)(g);
    const auto c = std::uniform_int_distribution<std::size_t>(0, 10)(g);
    d.features(r, c) = std::uniform_int_distribution<int>(-1, 5)(g);
  }
  std::size_t expected = 0;
  const auto& s = FeatureSchema::heart();
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const auto& dom = s.column(c).domain;
      if (s.column(c).kind == ColumnKind::nominal &&
          std::find(dom.begin(), dom.end(), static_cast<int>(d.features(r, c))) == dom.end()) {
        ++expected;
      }
    }
  }
  EXPECT_EQ(validate(d).row_errors.size(), expected);
}

TEST(RoundTrip, ToCsvThenParse) {
  const auto d = fixture::random_dataset(150, 17);
  const auto again = parse_csv(to_csv(d), "mem");
  EXPECT_EQ(d, again);
  EXPECT_EQ(to_csv(again), to_csv(d));
}

TEST(Summary, PearsonExtremes) {
  const std::vector<double> x{1, 2, 3}, y{3, 2, 1};
  EXPECT_DOUBLE_EQ(*pearson(x, y), -1.0);
  EXPECT_DOUBLE_EQ(*pearson(x, x), 1.0);
  EXPECT_FALSE(pearson(x, std::vector<double>{2, 2, 2}).has_value());
}

TEST(Summary, CorrelationSymmetricUnitDiagonal) {
  const auto s = summarize(fixture::random_dataset(300, 5));
  ASSERT_EQ(s.correlation.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(*s.correlation[i][i], 1.0);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(*s.correlation[i][j], *s.correlation[j][i], 1e-12);
  }
}

TEST(Summary, CountsAndHistograms) {
  const auto d = fixture::random_dataset(300, 5);
  const auto s = summarize(d);
  EXPECT_EQ(s.class_counts[0] + s.class_counts[1], 300u);
  std::size_t sex_total = 0;
  for (const auto& row : s.sex_by_target) sex_total += row[0] + row[1];
  EXPECT_EQ(sex_total, 300u);
  for (const auto& n : s.numeric) {
    std::size_t total = 0;
    for (auto c : n.histogram.counts) total += c;
    EXPECT_EQ(n.histogram.counts.size(), kHistogramBins);
    EXPECT_EQ(total, 300u);
  }
  EXPECT_THROW(summarize(d.subset(std::vector<std::size_t>{0})), InsufficientDataError);
}

TEST(ReferenceFile, LoadsAndValidates) {
  const auto d = load_csv(CARDIO_DATA);
  EXPECT_EQ(d.features.cols(), 11u);
  const auto rep = validate(d);
  EXPECT_TRUE(rep.is_valid());
  std::size_t zero_chol = 0;
  for (std::size_t r = 0; r < d.size(); ++r) zero_chol += d.features(r, col::cholesterol) == 0.0;
  std::size_t chol_warnings = 0;
  for (const auto& w : rep.warnings) chol_warnings += w.find("cholesterol") != std::string::npos;
  EXPECT_EQ(chol_warnings, zero_chol);
  EXPECT_GT(zero_chol, 0u);
  const auto s = summarize(d);
  EXPECT_GT(s.class_counts[1], s.class_counts[0]);
}
