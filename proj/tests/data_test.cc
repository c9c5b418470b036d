/*
 * Copyright 2026 The dcaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dcaudit/binning.h"
#include "dcaudit/dataset.h"
#include "dcaudit/random.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dcaudit {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

TEST(SplitDelimitedLineTest, HonorsQuotes) {
  EXPECT_THAT(SplitDelimitedLine("a,\"b,c\",d", ','),
              ElementsAre("a", "b,c", "d"));
  EXPECT_THAT(SplitDelimitedLine("\"say \"\"hi\"\"\",x", ','),
              ElementsAre("say \"hi\"", "x"));
  EXPECT_THAT(SplitDelimitedLine("a,,", ','), ElementsAre("a", "", ""));
  EXPECT_THAT(SplitDelimitedLine("1\t2", '\t'), ElementsAre("1", "2"));
}

TEST(ParseCsvTest, InfersKindsAndMarkers) {
  const std::string text =
      "age,race,score,outcome\n"
      "30,black,2.5,1\n"
      "NA,white,1.0,0\n"
      "41,,3.0,\n";
  auto data = ParseCsv(text, SchemaConfig());
  ASSERT_TRUE(data.ok()) << data.status();
  ASSERT_EQ(data->num_rows(), 3);
  ASSERT_EQ(data->num_features(), 2);
  EXPECT_EQ(data->feature(0).kind, FeatureKind::kNumeric);
  EXPECT_TRUE(std::isnan(data->feature(0).numeric[1]));
  EXPECT_EQ(data->feature(1).kind, FeatureKind::kCategorical);
  EXPECT_FALSE(data->feature(1).categorical[2].has_value());
  EXPECT_THAT(data->LabeledRows(), ElementsAre(0, 1));
  EXPECT_THAT(data->ScoreOnlyRows(), ElementsAre(2));
  EXPECT_THAT(data->OutcomeValues(data->LabeledRows()), ElementsAre(1.0, 0.0));
}

TEST(ParseCsvTest, DropsUnparseableScores) {
  auto data = ParseCsv("x,score,outcome\n1,oops,1\n2,0.5,0\n", SchemaConfig());
  ASSERT_TRUE(data.ok()) << data.status();
  EXPECT_EQ(data->num_rows(), 1);
  EXPECT_EQ(data->rejected_rows(), 1);
}

TEST(ParseCsvTest, TypeOverridesAndIgnoredColumns) {
  SchemaConfig config;
  config.feature_types["zip"] = FeatureKind::kCategorical;
  config.ignore_columns = {"id"};
  auto data = ParseCsv("id,zip,score,outcome\n7,02139,1,1\n8,10001,2,0\n",
                       config);
  ASSERT_TRUE(data.ok()) << data.status();
  ASSERT_EQ(data->num_features(), 1);
  EXPECT_EQ(data->feature(0).kind, FeatureKind::kCategorical);
  EXPECT_EQ(*data->feature(0).categorical[0], "02139");
}

TEST(ParseCsvTest, Errors) {
  const SchemaConfig config;
  EXPECT_THAT(ParseCsv("x,outcome\n1,1\n", config).status().message(),
              HasSubstr("missing score column 'score'"));
  EXPECT_THAT(ParseCsv("x,score\n1,1\n", config).status().message(),
              HasSubstr("missing outcome column 'outcome'"));
  EXPECT_THAT(ParseCsv("x,score,outcome\n1,1,2\n", config).status().message(),
              HasSubstr("non-binary outcome"));
  EXPECT_THAT(ParseCsv("x,score,outcome\n1,1\n", config).status().message(),
              HasSubstr("fields"));
  EXPECT_FALSE(ParseCsv("", config).ok());
  EXPECT_FALSE(ParseCsv("x,score,outcome\n", config).ok());
}

TEST(ParseCsvTest, RoundTrip) {
  const std::string text =
      "a,b,score,outcome\n1.5,\"x,y\",0.25,1\n-2,z,0.75,0\n";
  const SchemaConfig config;
  auto data = ParseCsv(text, config);
  ASSERT_TRUE(data.ok()) << data.status();
  auto again = ParseCsv(DatasetToCsv(*data, config), config);
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(again->feature(0).numeric, data->feature(0).numeric);
  EXPECT_EQ(again->feature(1).categorical, data->feature(1).categorical);
  EXPECT_EQ(std::vector<double>(again->scores().begin(), again->scores().end()),
            (std::vector<double>{0.25, 0.75}));
}

TEST(SchemaConfigTest, ParsesJson) {
  auto config = ParseSchemaConfig(
      R"({"delimiter": ";", "score_column": "s", "outcome_column": "y",
          "feature_types": {"g": "categorical"}, "ignore_columns": ["id"],
          "missing_markers": ["-"]})");
  ASSERT_TRUE(config.ok()) << config.status();
  EXPECT_EQ(config->delimiter, ';');
  EXPECT_EQ(config->score_column, "s");
  EXPECT_EQ(config->feature_types.at("g"), FeatureKind::kCategorical);
  EXPECT_THAT(config->missing_markers, ElementsAre("-"));
  EXPECT_FALSE(ParseSchemaConfig("[1, 2]").ok());
  EXPECT_FALSE(ParseSchemaConfig("{not json").ok());
}

TEST(AuditDatasetTest, RejectsInvalidColumns) {
  FeatureColumn short_column{"a", FeatureKind::kNumeric, {1.0}, {}};
  EXPECT_FALSE(AuditDataset::Create({short_column}, {1, 2},
                                    {Outcome::kNegative, Outcome::kPositive})
                   .ok());
  EXPECT_FALSE(AuditDataset::Create({}, {}, {}).ok());
  EXPECT_FALSE(AuditDataset::Create(
                   {}, {std::numeric_limits<double>::infinity()},
                   {Outcome::kNegative})
                   .ok());
  FeatureColumn a{"a", FeatureKind::kNumeric, {1.0}, {}};
  EXPECT_FALSE(AuditDataset::Create({a, a}, {1}, {Outcome::kNegative}).ok());
}

// Independent oracle: the i-th cut is the order statistic at floor(i n / B).
TEST(QuantileLowerEdgesTest, MatchesOrderStatistics) {
  Rng rng(3);
  std::uniform_real_distribution<double> uniform(0, 1);
  std::vector<double> values(1000);
  for (double& v : values) v = uniform(rng);
  auto edges = QuantileLowerEdges(values, 10);
  ASSERT_TRUE(edges.ok());
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  ASSERT_EQ(edges->size(), 10);
  for (int i = 0; i < 10; ++i) EXPECT_EQ((*edges)[i], sorted[i * 100]);
}

TEST(QuantileLowerEdgesTest, FewDistinctValuesKeepEveryValue) {
  const std::vector<double> values = {3, 1, 1, std::nan(""), 2, 3};
  auto edges = QuantileLowerEdges(values, 256);
  ASSERT_TRUE(edges.ok());
  EXPECT_THAT(*edges, ElementsAre(1, 2, 3));
  EXPECT_FALSE(QuantileLowerEdges(std::vector<double>{std::nan("")}, 4).ok());
}

TEST(BinningTest, NumericLookupMatchesLinearScan) {
  FeatureBinning b;
  b.lower_edges = {-1.0, 0.0, 2.5, 10.0};
  Rng rng(5);
  std::uniform_real_distribution<double> uniform(-5, 15);
  for (int i = 0; i < 2000; ++i) {
    const double v = uniform(rng);
    int expected = 0;
    for (int j = 0; j < 4; ++j) {
      if (v >= b.lower_edges[j]) expected = j;
    }
    EXPECT_EQ(b.BinOfNumeric(v), expected) << v;
  }
  EXPECT_EQ(b.BinOfNumeric(0.0), 1);
  EXPECT_EQ(b.BinOfNumeric(std::nan("")), b.missing_bin());
  EXPECT_EQ(b.missing_bin(), 4);
  EXPECT_EQ(b.num_bins(), 5);
}

TEST(BinningTest, CategoriesSortedUnseenToMissing) {
  FeatureColumn g{"g", FeatureKind::kCategorical, {}, {"b", "a", std::nullopt}};
  auto data = AuditDataset::Create(
      {g}, {1, 2, 3}, {Outcome::kNegative, Outcome::kPositive, Outcome::kAbsent});
  ASSERT_TRUE(data.ok());
  auto schema = FitSchema(*data);
  ASSERT_TRUE(schema.ok());
  const FeatureBinning& b = schema->features[0];
  EXPECT_THAT(b.categories, ElementsAre("a", "b"));
  EXPECT_EQ(b.BinOfCategory("a"), 0);
  EXPECT_EQ(b.BinOfCategory("zzz"), b.missing_bin());
  EXPECT_EQ(b.BinOfCategory(std::nullopt), b.missing_bin());
  auto x = Bin(*data, std::make_shared<const FeatureSchema>(*schema));
  ASSERT_TRUE(x.ok());
  EXPECT_EQ(x->at(0, 0), 1);
  EXPECT_EQ(x->at(2, 0), 2);
  EXPECT_THAT(x->BinCounts(0), ElementsAre(1, 1, 1));
}

TEST(BinningTest, SchemaJsonRoundTrip) {
  FeatureColumn a{"a", FeatureKind::kNumeric, {0.5, 1.5, std::nan("")}, {}};
  FeatureColumn g{"g", FeatureKind::kCategorical, {}, {"x", "y", "x"}};
  auto data = AuditDataset::Create(
      {a, g}, {1, 2, 3},
      {Outcome::kNegative, Outcome::kPositive, Outcome::kPositive});
  ASSERT_TRUE(data.ok());
  auto schema = FitSchema(*data);
  ASSERT_TRUE(schema.ok());
  auto back = SchemaFromJson(SchemaToJson(*schema));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(SchemaToJson(*back), SchemaToJson(*schema));
  EXPECT_EQ(back->FindFeature("g"), 1);
  EXPECT_EQ(back->FindFeature("nope"), -1);
  EXPECT_FALSE(FitSchema(*data, 1).ok());
}

}  // namespace
}  // namespace dcaudit
