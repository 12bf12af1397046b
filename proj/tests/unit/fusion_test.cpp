#include <gtest/gtest.h>

#include <cmath>

#include "anchorprobe/error.hpp"
#include "anchorprobe/fusion.hpp"
#include "anchorprobe/rng.hpp"
#include "fixtures.hpp"

using namespace anchorprobe;

namespace {

struct Pair {
  LayerTensorSet anchored, clean;
  std::vector<SampleRecord> am, cm;
};

// `images` clean rows and `anchors` anchored rows per image, all random.
Pair random_pair(std::size_t layers, std::size_t images, std::size_t anchors, std::size_t dim,
                 std::uint64_t seed) {
  Pair p{LayerTensorSet(layers, images * anchors, dim), LayerTensorSet(layers, images, dim), {}, {}};
  CounterRng rng(seed);
  for (auto& v : p.anchored.values()) v = static_cast<float>(rng.normal());
  for (auto& v : p.clean.values()) v = static_cast<float>(rng.normal());
  for (std::size_t i = 0; i < images; ++i) {
    SampleRecord c;
    c.image_id = "c_" + std::to_string(i);
    c.city = "c";
    c.model_id = "m";
    p.cm.push_back(c);
    for (std::size_t a = 0; a < anchors; ++a) {
      SampleRecord r = c;
      r.condition = Condition::anchor;
      r.anchor_value = static_cast<int>(2 * a);
      r.formulation = Formulation::baseline;
      p.am.push_back(r);
    }
  }
  return p;
}

}  // namespace

TEST(SimilarityCurve, IdenticalIsOneOrthogonalIsZero) {
  auto p = random_pair(3, 4, 1, 6, 1);
  p.anchored = p.clean;
  auto same = similarity_curve(p.anchored, p.am, p.clean, p.cm);
  for (const auto& pt : same.per_layer) EXPECT_NEAR(pt.mean, 1.0, 1e-12);

  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t d = 0; d < 6; ++d) {
        p.clean.at(l, i, d) = d < 3 ? 1.0f : 0.0f;
        p.anchored.at(l, i, d) = d < 3 ? 0.0f : static_cast<float>(i + 1);
      }
  auto ortho = similarity_curve(p.anchored, p.am, p.clean, p.cm);
  for (const auto& pt : ortho.per_layer) EXPECT_DOUBLE_EQ(pt.mean, 0.0);
}

TEST(SimilarityCurve, KnownAngle) {
  auto p = random_pair(1, 3, 1, 2, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    const double base = 0.7 * static_cast<double>(i);
    p.clean.at(0, i, 0) = static_cast<float>(std::cos(base));
    p.clean.at(0, i, 1) = static_cast<float>(std::sin(base));
    p.anchored.at(0, i, 0) = static_cast<float>(3 * std::cos(base + M_PI / 3));
    p.anchored.at(0, i, 1) = static_cast<float>(3 * std::sin(base + M_PI / 3));
  }
  const auto c = similarity_curve(p.anchored, p.am, p.clean, p.cm);
  EXPECT_NEAR(c.per_layer[0].mean, 0.5, 1e-6);
  EXPECT_NEAR(c.per_layer[0].sd, 0.0, 1e-6);
  EXPECT_EQ(c.per_layer[0].pairs, 3u);
}

TEST(SimilarityCurve, ScaleInvariant) {
  auto p = random_pair(4, 5, 6, 8, 3);
  const auto base = similarity_curve(p.anchored, p.am, p.clean, p.cm);
  for (auto& v : p.anchored.values()) v *= 4.0f;
  for (auto& v : p.clean.values()) v *= 0.5f;
  const auto scaled = similarity_curve(p.anchored, p.am, p.clean, p.cm);
  for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(base.per_layer[l].mean, scaled.per_layer[l].mean);
}

TEST(SimilarityCurve, UnpairedZeroNormAndFlaggedLayers) {
  auto p = random_pair(2, 3, 2, 4, 4);
  p.cm.pop_back();
  p.clean = LayerTensorSet(2, 2, 4, std::vector<float>(16, 1.0f));
  for (std::size_t d = 0; d < 4; ++d) p.anchored.at(0, 0, d) = 0.0f;
  for (std::size_t i = 0; i < p.am.size(); ++i)
    for (std::size_t d = 0; d < 4; ++d) p.anchored.at(1, i, d) = 0.0f;
  const auto c = similarity_curve(p.anchored, p.am, p.clean, p.cm);
  EXPECT_EQ(c.unpaired, 2u);
  EXPECT_EQ(c.per_layer[0].pairs, 3u);
  EXPECT_EQ(c.per_layer[0].zero_norm_excluded, 1u);
  EXPECT_TRUE(c.per_layer[1].flagged);
  EXPECT_FALSE(c.warnings.empty());

  auto lonely = random_pair(1, 2, 1, 3, 5);
  for (auto& r : lonely.cm) r.image_id += "_other";
  EXPECT_THROW(similarity_curve(lonely.anchored, lonely.am, lonely.clean, lonely.cm), ValidationError);
}

TEST(SimilarityCurve, AnchorRestriction) {
  auto p = random_pair(1, 3, 6, 4, 6);
  const auto one = similarity_curve(p.anchored, p.am, p.clean, p.cm, PairingOptions{4});
  EXPECT_EQ(one.per_layer[0].pairs, 3u);
}

TEST(FindFusionLayer, ExamplesAndMonotonicity) {
  const std::vector<double> g3{0.91, 0.983, 0.99};
  EXPECT_EQ(find_fusion_layer(g3), 1u);
  const std::vector<double> mini{0.1, 0.5, 0.939};
  EXPECT_FALSE(find_fusion_layer(mini));
  const std::vector<double> ones{1, 1, 1};
  EXPECT_EQ(find_fusion_layer(ones), 0u);
  const auto curve = fixture::gemma3_curve();
  std::size_t prev = 0;
  for (double t = 0.5; t <= 1.0; t += 0.01) {
    const auto f = find_fusion_layer(curve, t);
    if (!f) break;
    EXPECT_GE(*f, prev);
    prev = *f;
  }
}

TEST(MaxDrop, Examples) {
  const auto q = fixture::qwen3vl_curve();
  const auto d = max_consecutive_drop(q);
  EXPECT_EQ(d.layer, 7u);
  EXPECT_NEAR(d.value, 0.771, 1e-9);
  const std::vector<double> up{0.1, 0.2, 0.3};
  EXPECT_LE(max_consecutive_drop(up).value, 0.0);
  const std::vector<double> flat{0.4, 0.4, 0.4};
  EXPECT_DOUBLE_EQ(max_consecutive_drop(flat).value, 0.0);
  const std::vector<double> one{0.4};
  EXPECT_THROW(max_consecutive_drop(one), DomainError);
}

TEST(ClassifyPattern, PublishedCurves) {
  EXPECT_EQ(classify_pattern(fixture::gemma3_curve()), FusionPattern::instant_fusion);
  EXPECT_EQ(classify_pattern(fixture::gemma4_curve()), FusionPattern::instant_fusion);
  EXPECT_EQ(classify_pattern(fixture::minicpm_curve()), FusionPattern::gradual);
  EXPECT_EQ(classify_pattern(fixture::qwen35_curve()), FusionPattern::near_fusion_divergence);
  EXPECT_EQ(classify_pattern(fixture::qwen3vl_curve()), FusionPattern::drop_recovery);
}

TEST(ClassifyPattern, CurveSummary) {
  const auto g3 = curve_from_values(fixture::gemma3_curve());
  EXPECT_EQ(g3.fusion_layer, 1u);
  EXPECT_EQ(g3.peak.layer, 15u);
  EXPECT_NEAR(g3.peak.value, 0.999, 1e-12);
  const auto mini = curve_from_values(fixture::minicpm_curve());
  EXPECT_FALSE(mini.fusion_layer);
  EXPECT_EQ(mini.peak.layer, 31u);
  EXPECT_NEAR(mini.per_layer.front().mean, -0.14, 1e-12);
  const auto q35 = curve_from_values(fixture::qwen35_curve());
  EXPECT_EQ(q35.peak.layer, 1u);
  EXPECT_NEAR(q35.peak.value, 0.933, 1e-12);
}

TEST(ClassifyPattern, TotalAndShortCurves) {
  const std::vector<double> shortc{0.1, 0.99, 0.99};
  EXPECT_EQ(classify_pattern(shortc), FusionPattern::other);
  const std::vector<double> late{0.1, 0.3, 0.5, 0.7, 0.96, 0.97};
  EXPECT_EQ(classify_pattern(late), FusionPattern::other);
  CounterRng rng(8);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> v(4 + rng.uniform_below(30));
    for (auto& x : v) x = 2 * rng.uniform01() - 1;
    const auto p = classify_pattern(v);
    EXPECT_EQ(p, classify_pattern(v));
    EXPECT_FALSE(to_string(p).empty());
  }
}
