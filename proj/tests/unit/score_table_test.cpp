#include <gtest/gtest.h>

#include <fstream>

#include "anchorprobe/error.hpp"
#include "anchorprobe/score_table.hpp"
#include "fixtures.hpp"

using namespace anchorprobe;

namespace {

const char* kHeader = "image_id,city,condition,anchor,formulation,prompt_mode,model_id,score";

}  // namespace

TEST(Scores, ParsesRowsAndMetrics) {
  const std::string csv = std::string(kHeader) +
                          ",degradation_param,niqe\n"
                          "oslo_1,oslo,clean,,,simple,m,5.5,,3.2\n"
                          "oslo_1,oslo,anchor,8,baseline,simple,m,7,,\n"
                          "oslo_1,oslo,blur,,,thinking,m,4,5,4.1\n";
  const auto t = parse_scores(csv);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[1].record.anchor_value, 8);
  EXPECT_EQ(t.rows[2].record.degradation_param, 5.0);
  EXPECT_EQ(t.rows[2].record.prompt_mode, PromptMode::thinking);
  EXPECT_DOUBLE_EQ(t.rows[0].metrics.at("niqe"), 3.2);
  EXPECT_FALSE(t.rows[1].metrics.contains("niqe"));
  EXPECT_EQ(t.metric_names(), std::vector<std::string>{"niqe"});
}

TEST(Scores, FullGridLoads) {
  std::string csv = std::string(kHeader) + "\n";
  for (int i = 0; i < 700; ++i) {
    const std::string id = "c" + std::to_string(i % 14) + "_" + std::to_string(i);
    const std::string city = "c" + std::to_string(i % 14);
    csv += id + "," + city + ",clean,,,simple,m,5\n";
    for (int a : kAnchorValues)
      csv += id + "," + city + ",anchor," + std::to_string(a) + ",baseline,simple,m,5\n";
  }
  EXPECT_EQ(parse_scores(csv).rows.size(), 4900u);
}

TEST(Scores, OutOfRangeNamesRow) {
  const std::string csv = std::string(kHeader) + "\noslo_1,oslo,clean,,,simple,m,10.5\n";
  try {
    parse_scores(csv, "s.csv");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("10.5"), std::string::npos);
  }
}

TEST(Scores, DuplicateKeyRejected) {
  const std::string csv = std::string(kHeader) +
                          "\noslo_1,oslo,anchor,4,baseline,simple,m,5\n"
                          "oslo_1,oslo,anchor,4,baseline,simple,m,6\n";
  EXPECT_THROW(parse_scores(csv), ValidationError);
}

TEST(Scores, MissingColumnAndMalformedRows) {
  EXPECT_THROW(parse_scores("image_id,city,condition\nx,y,clean\n"), FormatError);
  EXPECT_THROW(parse_scores(std::string(kHeader) + "\na_1,a,clean,,,simple,m\n"), FormatError);
  EXPECT_THROW(parse_scores(std::string(kHeader) + "\na_1,a,clean,,,simple,m,abc\n"), FormatError);
  EXPECT_THROW(parse_scores(std::string(kHeader) + "\na_1,a,anchor,,,simple,m,5\n"), ValidationError);
  EXPECT_THROW(parse_scores(""), FormatError);
}

TEST(Scores, WriteLoadRoundTrip) {
  fixture::TempDir dir;
  ScoreTable t;
  t.rows.push_back(fixture::score_row("oslo_1", Condition::clean, std::nullopt, 4.25));
  t.rows.push_back(fixture::score_row("oslo_1", Condition::anchor, 10, 9.1, "m", PromptMode::thinking,
                                      Formulation::abstract));
  t.rows.push_back(fixture::score_row("oslo_1", Condition::jpeg, std::nullopt, 3.0, "m",
                                      PromptMode::simple, Formulation::baseline, 15.0));
  t.rows[0].metrics["brisque"] = 41.5;
  write_scores(t, dir / "s.csv");
  const auto back = load_scores(dir / "s.csv");
  ASSERT_EQ(back.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.rows[i].record.image_id, t.rows[i].record.image_id);
    EXPECT_EQ(back.rows[i].record.condition, t.rows[i].record.condition);
    EXPECT_EQ(back.rows[i].record.anchor_value, t.rows[i].record.anchor_value);
    EXPECT_EQ(back.rows[i].record.formulation, t.rows[i].record.formulation);
    EXPECT_EQ(back.rows[i].record.degradation_param, t.rows[i].record.degradation_param);
    EXPECT_DOUBLE_EQ(back.rows[i].score, t.rows[i].score);
  }
  EXPECT_DOUBLE_EQ(back.rows[0].metrics.at("brisque"), 41.5);
}
