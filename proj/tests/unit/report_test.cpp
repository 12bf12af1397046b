#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "anchorprobe/error.hpp"
#include "anchorprobe/report.hpp"
#include "anchorprobe/serialize.hpp"
#include "fixtures.hpp"

using namespace anchorprobe;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 42-layer accuracy: 0.990 first at L6, plateau of 1.0 from L12.
std::vector<double> gemma4_accuracy() {
  std::vector<double> v(42, 1.0);
  for (int l = 0; l < 6; ++l) v[l] = 0.4 + 0.05 * l;
  const double climb[] = {0.990, 0.992, 0.994, 0.996, 0.997, 0.998};
  for (int i = 0; i < 6; ++i) v[6 + i] = climb[i];
  return v;
}

/// 42-layer R²: 0.72 first above 0.5 at L1, best 0.91 at L29.
std::vector<double> gemma4_r2() {
  std::vector<double> v(42);
  v[0] = 0.31;
  for (int l = 1; l <= 29; ++l) v[l] = 0.72 + (0.91 - 0.72) * (l - 1) / 28.0;
  for (int l = 30; l < 42; ++l) v[l] = 0.90 - 0.01 * (l - 30);
  return v;
}

Json gemma4_bundle() {
  const auto acc = fixture::sweep_from_series(SweepMetric::accuracy, gemma4_accuracy(), 0.95);
  const auto r2 = fixture::sweep_from_series(SweepMetric::r_squared, gemma4_r2(), 0.5);
  const auto curve = curve_from_values(fixture::gemma4_curve());
  Json model{{"model_id", "gemma/4"}, {"anchor_sweep", to_json(acc)}, {"score_sweep", to_json(r2)},
             {"fusion", to_json(curve)}, {"pca", nullptr}};
  Json sus{{"model_id", "gemma/4"}, {"eta_squared", 0.42}, {"mean_abs_delta", 1.5}, {"r", 0.6}};
  return Json{{"schema_version", 1}, {"susceptibility", Json::array({sus})}, {"models", Json::array({model})}};
}

}  // namespace

TEST(CrossPhase, RowFromPublishedShapes) {
  const auto acc = fixture::sweep_from_series(SweepMetric::accuracy, gemma4_accuracy(), 0.95);
  const auto r2 = fixture::sweep_from_series(SweepMetric::r_squared, gemma4_r2(), 0.5);
  const auto curve = curve_from_values(fixture::gemma4_curve());
  const auto row = cross_phase_table("g4", &acc, &r2, &curve);
  ASSERT_TRUE(row.score_breakthrough);
  EXPECT_EQ(row.score_breakthrough->layer, 1u);
  EXPECT_NEAR(row.score_breakthrough->value, 0.72, 1e-12);
  ASSERT_TRUE(row.fusion_layer);
  EXPECT_EQ(row.fusion_layer->layer, 2u);
  EXPECT_NEAR(row.fusion_layer->value, 0.994, 1e-12);
  ASSERT_TRUE(row.anchor_breakthrough);
  EXPECT_EQ(row.anchor_breakthrough->layer, 6u);
  EXPECT_NEAR(row.anchor_breakthrough->value, 0.990, 1e-12);
  ASSERT_TRUE(row.anchor_saturation);
  EXPECT_EQ(row.anchor_saturation->layer, 12u);
  ASSERT_TRUE(row.best_r2);
  EXPECT_EQ(row.best_r2->layer, 29u);
  EXPECT_NEAR(row.best_r2->value, 0.91, 1e-12);
  EXPECT_TRUE(row.warnings.empty());

  const auto j = to_json(row);
  EXPECT_EQ(j.at("anchor_saturation").at("layer"), 12);
}

TEST(CrossPhase, MissingInputsGiveNullsAndWarnings) {
  const auto curve = curve_from_values(fixture::minicpm_curve());
  const auto row = cross_phase_table("m", nullptr, nullptr, &curve);
  EXPECT_FALSE(row.fusion_layer);
  EXPECT_FALSE(row.anchor_breakthrough);
  EXPECT_FALSE(row.best_r2);
  EXPECT_EQ(row.warnings.size(), 2u);
  EXPECT_TRUE(to_json(row).at("fusion_layer").is_null());

  LayerSweepResult empty;
  const auto none = cross_phase_table("m", &empty, &empty, nullptr);
  EXPECT_FALSE(none.anchor_saturation);
  EXPECT_FALSE(none.score_breakthrough);
  EXPECT_EQ(none.warnings.size(), 3u);
}

TEST(RenderReports, WritesFilesWithHeaders) {
  fixture::TempDir dir("report");
  const auto paths = render_reports(gemma4_bundle(), {ReportFormat::csv, ReportFormat::json, ReportFormat::svg},
                                    dir.path());
  ASSERT_EQ(paths.size(), 5u);
  for (const auto& p : paths) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  EXPECT_EQ(slurp(dir / "susceptibility.csv").substr(0, 35), "model,eta_squared,mean_abs_delta,r\n");
  const auto cross = slurp(dir / "cross_phase.csv");
  EXPECT_EQ(cross.rfind("model,score_layer,score_r2,fusion_layer", 0), 0u);
  EXPECT_NE(cross.find("gemma/4,1,"), std::string::npos);
  const auto report = Json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report.at("schema_version"), 1);
  EXPECT_EQ(report.at("cross_phase")[0].at("fusion_layer").at("layer"), 2);
  EXPECT_TRUE(std::filesystem::exists(dir / "layer_sweep_gemma_4.svg"));
  EXPECT_NE(slurp(dir / "fusion.svg").find("<svg"), std::string::npos);
}

TEST(RenderReports, SvgIsByteDeterministic) {
  fixture::TempDir a("svg_a"), b("svg_b");
  render_reports(gemma4_bundle(), {ReportFormat::svg}, a.path());
  render_reports(gemma4_bundle(), {ReportFormat::svg}, b.path());
  EXPECT_EQ(slurp(a / "fusion.svg"), slurp(b / "fusion.svg"));
  EXPECT_EQ(slurp(a / "layer_sweep_gemma_4.svg"), slurp(b / "layer_sweep_gemma_4.svg"));
}

TEST(RenderReports, Errors) {
  fixture::TempDir dir("report_err");
  EXPECT_THROW(parse_report_format("pdf"), DomainError);
  auto bad = gemma4_bundle();
  bad["schema_version"] = 99;
  EXPECT_THROW(render_reports(bad, {ReportFormat::json}, dir.path()), ValidationError);
  bad.erase("schema_version");
  EXPECT_THROW(render_reports(bad, {ReportFormat::json}, dir.path()), ValidationError);
  EXPECT_EQ(file_safe("a/b c"), "a_b_c");
  EXPECT_EQ(file_safe(""), "model");
}
